#pragma once

#include "ivlab/interp.hpp"
#include "ivlab/vector_field.hpp"

namespace ivlab {

/// Complex order parameter on the sites of a flat torus.
struct ScalarField {
  TorusDomain dom;
  ArrayXcd values;
  Real epsilon = 0.1;
  /// Nonempty when the field is band-limited by construction; enables exact
  /// trigonometric resampling in the deformation oracles.
  std::vector<TrigTerm> spectral;

  void validate() const {
    dom.validate();
    if (values.size() != dom.sites()) throw std::invalid_argument("ScalarField: size mismatch");
    if (!(epsilon >= 2.0 * dom.max_spacing()))
      throw std::invalid_argument("ScalarField: epsilon below the 2h resolution guard");
    if (!values.isFinite().all()) throw std::invalid_argument("ScalarField: non-finite values");
  }
  Complex at(int i0, int i1, int i2 = 0) const { return values[dom.index(i0, i1, i2)]; }
};

/// Abelian Higgs state: complex field on sites, real potential on directed
/// links, noncompact convention. A nonzero bundle degree d is carried by
/// twisted boundary data in the (0,1) plane:
///   u(x + P0 e0) = exp(i 2 pi d x1 / L1) u(x),  a1 jumps by 2 pi d / L1,
/// other axes plain periodic. Gauge-invariant quantities do not depend on the
/// representative.
struct GaugePair {
  TorusDomain dom;
  ArrayXcd u;
  std::array<ArrayXd, 3> a;
  int degree = 0;
  Real epsilon = 0.1;
  std::vector<TrigTerm> u_spectral;                 // d == 0 only
  std::array<std::vector<TrigTerm>, 3> a_spectral;  // real parts are used

  void validate() const {
    dom.validate();
    if (u.size() != dom.sites()) throw std::invalid_argument("GaugePair: u size mismatch");
    for (int j = 0; j < dom.n; ++j)
      if (a[j].size() != dom.sites()) throw std::invalid_argument("GaugePair: link size mismatch");
    if (!(epsilon >= 2.0 * dom.max_spacing()))
      throw std::invalid_argument("GaugePair: epsilon below the 2h resolution guard");
  }
  Real twist_jump() const { return 2.0 * kPi * degree / dom.periods[1]; }
};

/// Variation direction for a GaugePair: section part and one-form part.
struct EpsPair {
  TorusDomain dom;
  ArrayXcd phi;
  std::array<ArrayXd, 3> alpha;

  static EpsPair zero(const TorusDomain& dom) {
    EpsPair q;
    q.dom = dom;
    q.phi = ArrayXcd::Zero(dom.sites());
    for (int j = 0; j < dom.n; ++j) q.alpha[j] = ArrayXd::Zero(dom.sites());
    return q;
  }
};

// --- twisted fetch -----------------------------------------------------------

/// u value at unwrapped indices, twist phases applied per axis-0 wrap.
Complex fetch_u(const GaugePair& p, std::int64_t i0, std::int64_t i1, std::int64_t i2);
inline Complex fetch_periodic(const TorusDomain& dom, const ArrayXcd& f, std::int64_t i0,
                              std::int64_t i1, std::int64_t i2) {
  const int a0 = dom.wrap(static_cast<int>(i0 % dom.grid[0] + dom.grid[0]), 0);
  const int a1 = dom.wrap(static_cast<int>(i1 % dom.grid[1] + dom.grid[1]), 1);
  const int a2 = dom.n == 3 ? dom.wrap(static_cast<int>(i2 % dom.grid[2] + dom.grid[2]), 2) : 0;
  return f[dom.index(a0, a1, a2)];
}
inline Real fetch_periodic(const TorusDomain& dom, const ArrayXd& f, std::int64_t i0,
                           std::int64_t i1, std::int64_t i2) {
  const int a0 = dom.wrap(static_cast<int>(i0 % dom.grid[0] + dom.grid[0]), 0);
  const int a1 = dom.wrap(static_cast<int>(i1 % dom.grid[1] + dom.grid[1]), 1);
  const int a2 = dom.n == 3 ? dom.wrap(static_cast<int>(i2 % dom.grid[2] + dom.grid[2]), 2) : 0;
  return f[dom.index(a0, a1, a2)];
}
/// Link value at unwrapped indices; a[1] picks up the twist jump per wrap.
Real fetch_a(const GaugePair& p, int axis, std::int64_t i0, std::int64_t i1, std::int64_t i2);

/// Uniform-flux background potential matching the twist data of degree d:
/// a1(x) = (2 pi d / (L0 L1)) * x0, other components zero.
ArrayXd background_a1(const TorusDomain& dom, int degree);

// --- state constructors ------------------------------------------------------

ScalarField random_scalar_state(const TorusDomain& dom, Real epsilon, Rng& rng, int max_mode = 2,
                                Real amplitude = 0.4, Complex background = Complex(0.75, 0.1));
GaugePair random_gauge_state(const TorusDomain& dom, Real epsilon, Rng& rng, int max_mode = 2,
                             Real amplitude = 0.4, Real link_amplitude = 0.5);

// --- resampling --------------------------------------------------------------

enum class ResampleMethod { cubic, spectral, automatic };

/// Pullback of the field by the time-t flow of X: value at x is the field
/// interpolated at Phi^{-t}(x).
ScalarField resample_pullback(const ScalarField& f, const VectorFieldSpec& X, Real t,
                              ResampleMethod method = ResampleMethod::automatic);

/// Pullback of (u, a) by the flow: u composed with the inverse flow, the
/// potential pulled back through the cotangent action and re-discretised at
/// link midpoints. For twisted pairs a compensating gauge transformation
/// returns the result to the standard twist representative.
GaugePair pullback_pair(const GaugePair& p, const VectorFieldSpec& X, Real t,
                        ResampleMethod method = ResampleMethod::automatic);

/// Cubic transfer to a finer/coarser grid (same periods).
ScalarField regrid(const ScalarField& f, const TorusDomain& target);
GaugePair regrid(const GaugePair& p, const TorusDomain& target);

// --- packing for solvers and eigensolvers -------------------------------------

VectorXd pack(const ScalarField& f);
void unpack(const VectorXd& v, ScalarField& f);
VectorXd pack(const EpsPair& q);
void unpack(const VectorXd& v, EpsPair& q);
std::int64_t dof_count(const ScalarField& f);
std::int64_t dof_count(const TorusDomain& dom, bool gauge_pair);

}  // namespace ivlab
