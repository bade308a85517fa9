#pragma once

#include "ivlab/solve.hpp"

namespace ivlab {

struct LinOp {
  std::int64_t dim = 0;
  std::function<VectorXd(const VectorXd&)> apply;
};

struct EigenOptions {
  int count = 4;
  int block = 0;  // 0 -> count + 4
  int max_iters = 600;
  Real tol = 1e-6;
  std::uint64_t seed = 0x5eedULL;
};

struct EigenResult {
  std::vector<Real> values;
  MatrixXd vectors;  // dim x count, M-orthonormal
  std::vector<Real> residuals;
  bool converged = false;
  int iterations = 0;
};

/// Locally optimal block preconditioned conjugate gradient iteration for the
/// smallest eigenpairs of A v = lambda M v, all operators matrix-free.
/// `projector`, when given, constrains the iteration to its range (applied
/// after every operator application).
EigenResult lobpcg(const LinOp& A, const LinOp& M, const LinOp* precond, const LinOp* projector,
                   const EigenOptions& opts);

enum class MassPairing { plain, eps_weighted };
enum class GaugeHandling { raw, projected };

struct SpectrumRequest {
  FieldState state;
  ArrayXd mask;  // site indicator of U; empty means the full domain
  int count = 4;
  MassPairing pairing = MassPairing::plain;  // eps_weighted recommended for gauge states
  GaugeHandling gauge = GaugeHandling::projected;
  EigenOptions opts;
};

struct SpectrumResult {
  std::vector<Real> values;
  std::vector<Real> residuals;
  bool converged = false;
  int iterations = 0;
  MatrixXd vectors;
};

SpectrumResult lowest_eigenvalues(const SpectrumRequest& req);

struct JacobiSpectrum {
  std::vector<Real> values;  // non-decreasing, one entry per eigenvalue
  bool closed_form = true;
};

/// Jacobi-operator eigenvalues on normal fields of Gamma restricted to U:
/// circles give (2 pi k / L)^2 (two Fourier phases x two normal directions),
/// arcs give Dirichlet values (k pi / |arc|)^2, points give zeros.
JacobiSpectrum jacobi_spectrum(const Varifold& gamma, const std::function<bool(const Point&)>& in_U,
                               int count);
JacobiSpectrum jacobi_spectrum(const Varifold& gamma, int count);

struct RayleighBounds {
  std::vector<Real> values;      // ordered Ritz values; upper bounds for lambda_p
  Real injectivity_margin = 0;   // smallest singular value of the mass Gram
  Real gram_condition = 0;
};

/// Upper bounds from the pushforward test space phi_i = <X_i, grad u> (scalar
/// model) or (grad_{X_i} u, omega(X_i, .)) (gauge model): Ritz values of the
/// Hessian on that span. Throws when the Gram matrix is numerically singular
/// (condition number > 1e8), which signals loss of injectivity.
RayleighBounds rayleigh_upper_bounds(const ScalarField& f,
                                     const std::vector<VectorFieldSpec>& basis,
                                     const ArrayXd& mask = ArrayXd());
RayleighBounds rayleigh_upper_bounds(const GaugePair& p,
                                     const std::vector<VectorFieldSpec>& basis,
                                     MassPairing pairing = MassPairing::eps_weighted,
                                     const ArrayXd& mask = ArrayXd());

struct IndexReport {
  std::vector<Real> epsilons;
  std::vector<std::vector<Real>> lambda_eps;  // per ladder stage
  std::vector<Real> lambda_limit;             // Jacobi targets
  Real factor = 1.0;                          // 1 scalar, 2 gauge
  std::vector<std::vector<Real>> margins;     // lambda_eps - factor * lambda_limit
  std::vector<int> morse_index;               // negative count per stage
  int limit_index = 0;
  bool inequality_ok = false;
  Real tol_at_final = 0;
};

/// Assemble the inequality report: margins per stage, scale-aware negative
/// counting (threshold 1e-6 / eps^2), and the verdict at the smallest eps
/// with tolerance 0.05 / eps^2.
IndexReport make_index_report(const std::vector<Real>& epsilons,
                              const std::vector<std::vector<Real>>& lambda_eps,
                              const JacobiSpectrum& jacobi, Real factor);

}  // namespace ivlab
