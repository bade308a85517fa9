#pragma once

#include "ivlab/gl.hpp"

namespace ivlab {

/// Covariant forward difference D_j u(x) = (e^{-i h a_j(x)} u(x+e_j) - u(x))/h_j
/// per link, twist-aware.
std::array<ArrayXcd, 3> covariant_diff(const GaugePair& p);

/// Unwrapped-index fetch for section-valued fields (same twist rule as u).
Complex fetch_section(const GaugePair& p, const ArrayXcd& f, std::int64_t i0, std::int64_t i1,
                      std::int64_t i2);

/// Plaquette curvature omega_{jk}(x) for j < k, stored at the plaquette corner.
/// Genuinely periodic (the twist jumps cancel in the curl).
struct Curvature {
  // plane index: (0,1)->0, (0,2)->1, (1,2)->2
  std::array<ArrayXd, 3> w;
  static int plane(int j, int k) { return j == 0 ? (k == 1 ? 0 : 1) : 2; }
};
Curvature curvature_of(const GaugePair& p);

struct YmhResiduals {
  ArrayXcd r_u;
  std::array<ArrayXd, 3> r_a;
  Real sup_norm() const;
};

EnergyReport ymh_energy(const GaugePair& p);
Real ymh_energy_total(const GaugePair& p);
YmhResiduals ymh_residuals(const GaugePair& p);
EpsPair ymh_gradient(const GaugePair& p);
GaugePair gauge_transform(const GaugePair& p, const ArrayXd& chi);
/// Gauge variation direction (i chi u, d chi).
EpsPair gauge_direction(const GaugePair& p, const ArrayXd& chi);
Real eps_inner_product(const EpsPair& a, const EpsPair& b, Real epsilon);
Real plain_inner_product(const EpsPair& a, const EpsPair& b);
StressField ymh_stress(const GaugePair& p);
EnergyReport ymh_energy_measure(const GaugePair& p);
EpsPair ymh_hessian_apply(const GaugePair& p, const EpsPair& q);
/// Total flux through the (0,1) planes divided by 2 pi; throws if the flux is
/// not an integer to 1e-6 (corrupted twist data).
int bundle_degree(const GaugePair& p);

}  // namespace ivlab
