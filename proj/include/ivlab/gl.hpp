#pragma once

#include "ivlab/fields.hpp"

namespace ivlab {

/// Per-site stress tensor pair: S and T = e g - S (flat metric).
struct StressField {
  TorusDomain dom;
  std::vector<Mat3> S;
  std::vector<Mat3> T;
  ArrayXd energy_density;
  /// Site-averaged curvature 2-form as an antisymmetric matrix (gauge models
  /// only; empty for scalar models).
  std::vector<Mat3> omega;
};

struct EnergyReport {
  Real total = 0;
  ArrayXd density;  // site density; sum(density) * cellvol == total
};

inline Real double_well(Complex u) {
  const Real m = 1.0 - std::norm(u);
  return 0.25 * m * m;
}

/// E = sum over links of |grad+ u|^2 / 2 plus the potential; the density is
/// the symmetric link average so it sums back to the total exactly.
EnergyReport gl_energy(const ScalarField& f);
Real gl_energy_total(const ScalarField& f);

/// r = eps^2 Lap u - u(|u|^2 - 1) with the compact (2n+1)-point Laplacian.
ArrayXcd gl_residual(const ScalarField& f);

/// L^2 gradient of the energy; equals -gl_residual / eps^2.
ArrayXcd gl_gradient(const ScalarField& f);

/// S_jk = Re< d_j u, d_k u > by central differences; T = e g - S.
StressField gl_stress(const ScalarField& f);

/// Normalised energy density e / (pi |log eps|); requires eps < 1.
EnergyReport gl_energy_measure(const ScalarField& f);

/// H phi = -Lap phi + [(2|u|^2 - 1) phi + u^2 conj(phi)] / eps^2,
/// the real-linear self-adjoint second-variation operator.
ArrayXcd gl_hessian_apply(const ScalarField& f, const ArrayXcd& phi);

/// <a, b>_{L^2} = sum Re(a conj(b)) cellvol.
Real l2_inner(const TorusDomain& dom, const ArrayXcd& a, const ArrayXcd& b);

}  // namespace ivlab
