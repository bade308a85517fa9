#pragma once

#include "ivlab/varifold.hpp"
#include "ivlab/ymh.hpp"

namespace ivlab {

enum class Model { gl, ymh };

/// Breakdown of the analytic second-order response of the energy under the
/// flow of X. `stress_term` is the full second-derivative-of-the-metric
/// pairing including, for gauge models, the curvature cross term
/// eps^2 gdot#gdot : omega#omega that the two-form norm produces.
struct SecondVariation {
  Real total = 0;
  Real stress_term = 0;   // 1/2 <2 gdot o gdot - gddot, S> (+ omega cross)
  Real omega_cross = 0;   // gauge models; included in stress_term
  Real div_term = 0;      // -<gdot, S> div X
  Real volume_term = 0;   // e * d^2/dt^2 of the volume element
  /// Same sum with the divergence coefficient halved; kept so reports can
  /// record which coefficient the deformation oracle supports.
  Real total_half_div = 0;
  /// L^1 mass of the integrand (conditioning scale for comparisons).
  Real integrand_scale = 0;
};

struct LimitSecondVariation {
  Real total = 0;
  Real d2_area = 0;
  Real error_term = 0;  // integral of (gdot_aa - gdot_bb)^2/4 + gdot_ab^2 over Gamma
};

struct OracleValue {
  Real value = 0;
  Real error_estimate = 0;  // disagreement between the 5- and 3-point stencils
  bool reliable = true;
};

/// First inner variation, analytic route: integral of <T, grad X>.
Real first_inner_variation_analytic(const ScalarField& f, const VectorFieldSpec& X);
Real first_inner_variation_analytic(const GaugePair& p, const VectorFieldSpec& X);

/// L^1 mass of the integrand |<T, grad X>|: the conditioning scale of the
/// identity when the signed integral nearly cancels.
Real first_inner_variation_scale(const ScalarField& f, const VectorFieldSpec& X);
Real first_inner_variation_scale(const GaugePair& p, const VectorFieldSpec& X);

/// First inner variation, oracle route: Richardson finite differences in t of
/// the energy of the pulled-back state.
Real first_inner_variation_oracle(const ScalarField& f, const VectorFieldSpec& X,
                                  Real tau = 1e-2,
                                  ResampleMethod method = ResampleMethod::automatic);
Real first_inner_variation_oracle(const GaugePair& p, const VectorFieldSpec& X, Real tau = 1e-2,
                                  ResampleMethod method = ResampleMethod::automatic);

SecondVariation second_inner_variation_analytic(const ScalarField& f, const VectorFieldSpec& X);
SecondVariation second_inner_variation_analytic(const GaugePair& p, const VectorFieldSpec& X);

OracleValue second_inner_variation_oracle(const ScalarField& f, const VectorFieldSpec& X,
                                          Real tau = 1e-2,
                                          ResampleMethod method = ResampleMethod::automatic);
OracleValue second_inner_variation_oracle(const GaugePair& p, const VectorFieldSpec& X,
                                          Real tau = 1e-2,
                                          ResampleMethod method = ResampleMethod::automatic);

/// Geometric side of the limit identity:
/// sum_i m_i [ D^2 A(Gamma_i)(X,X) + int_{Gamma_i} -div_N(X)^2 + |gdot|^2_N / 2 ],
/// the error density hard-coded as its expanded quadratic form.
LimitSecondVariation limit_second_variation(const Varifold& gamma, const VectorFieldSpec& X,
                                            int samples = 256);

/// Normalisation constant relating energies to the varifold: pi |log eps| for
/// the scalar model, 2 pi for the gauge model.
Real model_normalization(Model m, Real epsilon);

/// int <S, P> for a continuous symmetric probe.
using ProbeField = std::function<Mat3(const Point&)>;
Real stress_pairing(const StressField& s, const ProbeField& P);
/// Limit side: sum_i m_i c int_{Gamma_i} tr_{N}(P).
Real limit_pairing(const Varifold& gamma, const ProbeField& P, Real c, int samples = 256);

struct ConcentrationReport {
  std::vector<Real> radii;
  std::vector<Real> tube_masses;  // energy-measure mass within each radius
  Real total_mass = 0;
  Real delta = 0;
  std::int64_t sublevel_count = 0;
  Real hausdorff = 0;  // diameter sentinel when the sublevel set is empty
};

ConcentrationReport concentration_report(const EnergyReport& measure, const ArrayXcd& u,
                                         const TorusDomain& dom, const Varifold& gamma,
                                         Real delta, const std::vector<Real>& radii);

}  // namespace ivlab
