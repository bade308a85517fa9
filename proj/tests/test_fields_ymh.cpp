#include <doctest.h>

#include "ivlab/solve.hpp"
#include "ivlab/ymh.hpp"

using namespace ivlab;

namespace {

GaugePair vacuum(const TorusDomain& dom, Real eps) {
  GaugePair p;
  p.dom = dom;
  p.epsilon = eps;
  p.degree = 0;
  p.u = ArrayXcd::Constant(dom.sites(), Complex(1, 0));
  for (int j = 0; j < dom.n; ++j) p.a[j] = ArrayXd::Zero(dom.sites());
  return p;
}

ArrayXd random_chi(const TorusDomain& dom, Rng& rng, Real amp = 1.0) {
  ArrayXd chi(dom.sites());
  for (std::int64_t i = 0; i < dom.sites(); ++i) chi[i] = amp * rng.uniform(-1.0, 1.0);
  return chi;
}

EpsPair random_pair_dir(const TorusDomain& dom, Rng& rng, Real amp = 1.0) {
  EpsPair q = EpsPair::zero(dom);
  for (std::int64_t i = 0; i < dom.sites(); ++i)
    q.phi[i] = Complex(amp * rng.uniform(-1, 1), amp * rng.uniform(-1, 1));
  for (int j = 0; j < dom.n; ++j)
    for (std::int64_t i = 0; i < dom.sites(); ++i) q.alpha[j][i] = amp * rng.uniform(-1, 1);
  return q;
}

GaugePair perturb(const GaugePair& p, const EpsPair& q, Real s) {
  GaugePair out = p;
  out.u = p.u + s * q.phi.cast<Complex>();
  for (int j = 0; j < p.dom.n; ++j) out.a[j] = p.a[j] + s * q.alpha[j];
  out.u_spectral.clear();
  for (auto& t : out.a_spectral) t.clear();
  return out;
}

}  // namespace

TEST_CASE("ymh_energy basics") {
  const TorusDomain dom = TorusDomain::square(24);
  const Real eps = 0.12;
  SUBCASE("vacuum has zero energy") {
    CHECK(ymh_energy(vacuum(dom, eps)).total == doctest::Approx(0.0));
  }
  SUBCASE("u = 0, a = 0: pure potential 1/(4 eps^2)") {
    GaugePair p = vacuum(dom, eps);
    p.u.setZero();
    CHECK(ymh_energy(p).total == doctest::Approx(1.0 / (4 * eps * eps)).epsilon(1e-12));
  }
  SUBCASE("density sums exactly to the total") {
    Rng rng(3);
    const GaugePair p = random_gauge_state(dom, 0.2, rng);
    const EnergyReport rep = ymh_energy(p);
    CHECK(rep.density.sum() * dom.cell_volume() == doctest::Approx(rep.total).epsilon(1e-13));
    CHECK(rep.total == doctest::Approx(ymh_energy_total(p)).epsilon(1e-13));
  }
}

TEST_CASE("exact lattice gauge invariance") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(5);
  const GaugePair p = random_gauge_state(dom, 0.25, rng);
  Rng rchi(7);
  const ArrayXd chi = random_chi(dom, rchi);
  const GaugePair g = gauge_transform(p, chi);

  SUBCASE("energy invariant to 1e-12") {
    CHECK(std::abs(ymh_energy_total(p) - ymh_energy_total(g)) /
              std::max(1.0, ymh_energy_total(p)) < 1e-12);
  }
  SUBCASE("residual norms invariant") {
    const YmhResiduals rp = ymh_residuals(p);
    const YmhResiduals rg = ymh_residuals(g);
    CHECK(std::abs(rp.sup_norm() - rg.sup_norm()) < 1e-11 * (1.0 + rp.sup_norm()));
    // covariance: r_u transforms by the phase, r_a is invariant
    Real err = 0;
    for (std::int64_t i = 0; i < dom.sites(); ++i)
      err = std::max(err, std::abs(rg.r_u[i] -
                                   rp.r_u[i] * Complex(std::cos(chi[i]), std::sin(chi[i]))));
    CHECK(err < 1e-11);
    for (int j = 0; j < dom.n; ++j)
      CHECK((rg.r_a[j] - rp.r_a[j]).abs().maxCoeff() < 1e-11);
  }
  SUBCASE("stress tensors invariant") {
    const StressField sp = ymh_stress(p);
    const StressField sg = ymh_stress(g);
    Real err = 0;
    for (std::int64_t i = 0; i < dom.sites(); i += 11)
      err = std::max(err, (sp.S[i] - sg.S[i]).norm() + (sp.T[i] - sg.T[i]).norm());
    CHECK(err < 1e-11);
  }
  SUBCASE("constant chi only rotates u") {
    const ArrayXd cchi = ArrayXd::Constant(dom.sites(), 0.9);
    const GaugePair gc = gauge_transform(p, cchi);
    for (int j = 0; j < dom.n; ++j) CHECK((gc.a[j] - p.a[j]).abs().maxCoeff() == 0.0);
    CHECK(std::abs(gc.u[3] - p.u[3] * Complex(std::cos(0.9), std::sin(0.9))) < 1e-15);
  }
  SUBCASE("transform composition is additive") {
    Rng r2(11);
    const ArrayXd chi2 = random_chi(dom, r2);
    const GaugePair g12 = gauge_transform(gauge_transform(p, chi), chi2);
    const GaugePair gsum = gauge_transform(p, ArrayXd(chi + chi2));
    CHECK((g12.u - gsum.u).abs().maxCoeff() < 1e-12);
    for (int j = 0; j < dom.n; ++j)
      CHECK((g12.a[j] - gsum.a[j]).abs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("summation by parts is exact") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(13);
  const GaugePair p = random_gauge_state(dom, 0.25, rng);
  Rng r2(17);
  const GaugePair v = random_gauge_state(dom, 0.25, r2);

  // <D*D u, v> = <D u, D v> with the covariant difference of p.
  const auto Du = covariant_diff(p);
  GaugePair pv = p;
  pv.u = v.u;
  const auto Dv = covariant_diff(pv);

  // Assemble D*D u through the residual with the potential turned off.
  Real lhs = 0;
  {
    GaugePair pz = p;
    const YmhResiduals r = ymh_residuals(pz);
    // r_u = eps^2 D*D u - (1 - |u|^2) u / 2: recover D*D u
    for (std::int64_t i = 0; i < dom.sites(); ++i) {
      const Complex ddu =
          (r.r_u[i] + 0.5 * (1.0 - std::norm(p.u[i])) * p.u[i]) / (p.epsilon * p.epsilon);
      lhs += (ddu * std::conj(v.u[i])).real();
    }
    lhs *= dom.cell_volume();
  }
  Real rhs = 0;
  for (int j = 0; j < dom.n; ++j)
    for (std::int64_t i = 0; i < dom.sites(); ++i)
      rhs += (Du[j][i] * std::conj(Dv[j][i])).real();
  rhs *= dom.cell_volume();
  CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12}) < 1e-12);
}

TEST_CASE("eps_inner_product") {
  const TorusDomain dom = TorusDomain::square(16);
  const Real eps = 0.2;
  SUBCASE("zero pairs give zero") {
    EpsPair a = EpsPair::zero(dom), b = EpsPair::zero(dom);
    CHECK(eps_inner_product(a, b, eps) == 0.0);
  }
  SUBCASE("unit link field on the unit torus gives eps^2 n") {
    EpsPair a = EpsPair::zero(dom);
    for (int j = 0; j < dom.n; ++j) a.alpha[j].setOnes();
    CHECK(eps_inner_product(a, a, eps) == doctest::Approx(eps * eps * dom.n).epsilon(1e-13));
  }
  SUBCASE("bilinear and symmetric") {
    Rng rng(19);
    const EpsPair a = random_pair_dir(dom, rng);
    const EpsPair b = random_pair_dir(dom, rng);
    const EpsPair c = random_pair_dir(dom, rng);
    EpsPair bc = b;
    bc.phi = b.phi + 2.5 * c.phi;
    for (int j = 0; j < dom.n; ++j) bc.alpha[j] = b.alpha[j] + 2.5 * c.alpha[j];
    const Real lhs = eps_inner_product(a, bc, eps);
    const Real rhs = eps_inner_product(a, b, eps) + 2.5 * eps_inner_product(a, c, eps);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(eps_inner_product(a, b, eps) == doctest::Approx(eps_inner_product(b, a, eps)));
  }
}

TEST_CASE("ymh_gradient matches directional finite differences") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(23);
  const GaugePair p = random_gauge_state(dom, 0.25, rng);
  Rng r2(29);
  const EpsPair q = random_pair_dir(dom, r2, 0.7);
  const EpsPair g = ymh_gradient(p);
  const Real pairing = plain_inner_product(g, q);
  const Real s = 1e-6;
  const Real fd = (ymh_energy_total(perturb(p, q, s)) - ymh_energy_total(perturb(p, q, -s))) /
                  (2.0 * s);
  CHECK(std::abs(pairing - fd) / std::max(std::abs(fd), 1e-12) < 1e-6);
}

TEST_CASE("ymh_stress") {
  const TorusDomain dom = TorusDomain::square(24);
  SUBCASE("vacuum: S = T = 0") {
    const StressField s = ymh_stress(vacuum(dom, 0.15));
    CHECK(s.S[10].norm() == doctest::Approx(0.0));
    CHECK(s.T[10].norm() == doctest::Approx(0.0));
  }
  SUBCASE("trace identity") {
    Rng rng(31);
    const GaugePair p = random_gauge_state(dom, 0.2, rng);
    const StressField s = ymh_stress(p);
    for (std::int64_t idx : {std::int64_t(5), std::int64_t(333)}) {
      CHECK(s.T[idx].trace() == doctest::Approx(dom.n * s.energy_density[idx] -
                                                s.S[idx].trace()).epsilon(1e-12));
    }
  }
}

TEST_CASE("ymh_hessian_apply") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(37);
  const GaugePair p = random_gauge_state(dom, 0.25, rng);

  SUBCASE("quadratic form matches second differences, rel 1e-5") {
    Rng r2(41);
    const EpsPair q = random_pair_dir(dom, r2, 0.6);
    const EpsPair Hq = ymh_hessian_apply(p, q);
    const Real quad = plain_inner_product(Hq, q);
    const Real s = 1e-4;
    const Real fd = (ymh_energy_total(perturb(p, q, s)) - 2.0 * ymh_energy_total(p) +
                     ymh_energy_total(perturb(p, q, -s))) /
                    (s * s);
    CHECK(std::abs(quad - fd) / std::max(std::abs(fd), 1e-10) < 1e-5);
  }
  SUBCASE("self-adjointness, rel 1e-10") {
    Rng ra(43), rb(47);
    const EpsPair a = random_pair_dir(dom, ra);
    const EpsPair b = random_pair_dir(dom, rb);
    const Real lhs = plain_inner_product(ymh_hessian_apply(p, a), b);
    const Real rhs = plain_inner_product(a, ymh_hessian_apply(p, b));
    CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12}) < 1e-10);
  }
  SUBCASE("Hessian linearises the gradient") {
    Rng r2(53);
    const EpsPair q = random_pair_dir(dom, r2, 0.5);
    const Real s = 1e-5;
    const EpsPair gp = ymh_gradient(perturb(p, q, s));
    const EpsPair gm = ymh_gradient(perturb(p, q, -s));
    const EpsPair Hq = ymh_hessian_apply(p, q);
    Real err = 0, scale = 0;
    for (std::int64_t i = 0; i < dom.sites(); ++i) {
      err = std::max(err, std::abs((gp.phi[i] - gm.phi[i]) / (2 * s) - Hq.phi[i]));
      scale = std::max(scale, std::abs(Hq.phi[i]));
    }
    for (int j = 0; j < dom.n; ++j)
      for (std::int64_t i = 0; i < dom.sites(); ++i) {
        err = std::max(err, std::abs((gp.alpha[j][i] - gm.alpha[j][i]) / (2 * s) -
                                     Hq.alpha[j][i]));
        scale = std::max(scale, std::abs(Hq.alpha[j][i]));
      }
    CHECK(err / scale < 1e-5);
  }
}

TEST_CASE("bundle degree and twist") {
  const TorusDomain dom = TorusDomain::square(24);
  SUBCASE("vacuum has degree 0") { CHECK(bundle_degree(vacuum(dom, 0.12)) == 0); }
  SUBCASE("uniform flux background carries the twist degree") {
    GaugePair p = vacuum(dom, 0.12);
    p.degree = 1;
    p.a[1] = background_a1(dom, 1);
    CHECK(bundle_degree(p) == 1);
    GaugePair p3 = vacuum(dom, 0.12);
    p3.degree = 3;
    p3.a[1] = background_a1(dom, 3);
    CHECK(bundle_degree(p3) == 3);
  }
  SUBCASE("degree invariant under gauge transforms") {
    GaugePair p = ymh_vortex_ansatz(dom, 0.12, 1, Point(0.5, 0.5, 0));
    CHECK(bundle_degree(p) == 1);
    Rng rng(59);
    const GaugePair g = gauge_transform(p, random_chi(dom, rng));
    CHECK(bundle_degree(g) == 1);
  }
  SUBCASE("twisted energy is gauge invariant too") {
    GaugePair p = ymh_vortex_ansatz(dom, 0.12, 1, Point(0.5, 0.5, 0));
    Rng rng(61);
    const GaugePair g = gauge_transform(p, random_chi(dom, rng));
    CHECK(std::abs(ymh_energy_total(p) - ymh_energy_total(g)) /
              std::max(1.0, ymh_energy_total(p)) < 1e-12);
  }
  SUBCASE("gauge null direction at a critical point") {
    // The vacuum is an exact critical point; gauge directions are null.
    GaugePair p = vacuum(dom, 0.12);
    Rng rng(67);
    const ArrayXd chi = random_chi(dom, rng, 0.5);
    const EpsPair qchi = gauge_direction(p, chi);
    const EpsPair H = ymh_hessian_apply(p, qchi);
    const Real quad = plain_inner_product(H, qchi);
    const Real scale = plain_inner_product(qchi, qchi);
    CHECK(std::abs(quad) / std::max(scale, 1e-12) < 1e-10);
  }
}
