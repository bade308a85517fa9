#include <doctest.h>

#include "ivlab/gl.hpp"

using namespace ivlab;

namespace {

ScalarField uniform_field(const TorusDomain& dom, Complex value, Real eps) {
  ScalarField f;
  f.dom = dom;
  f.epsilon = eps;
  f.values = ArrayXcd::Constant(dom.sites(), value);
  return f;
}

// Closed-form two-pair vortex-like test field with tanh cores:
// s(x) = sin(2 pi x0/L) + i sin(2 pi x1/L), u = s * tanh(|s|/w)/|s|.
ScalarField analytic_pair_field(const TorusDomain& dom, Real eps) {
  ScalarField f;
  f.dom = dom;
  f.epsilon = eps;
  f.values = ArrayXcd::Zero(dom.sites());
  const Real w = 2.5 * eps;
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const Point x = dom.site_point(dom.coords(idx));
    const Complex s(std::sin(2.0 * kPi * x[0] / dom.periods[0]),
                    std::sin(2.0 * kPi * x[1] / dom.periods[1]));
    const Real m = std::abs(s);
    f.values[idx] = m < 1e-14 ? Complex(0, 0) : s * (std::tanh(m / w) / m);
  }
  return f;
}

}  // namespace

TEST_CASE("gl_energy") {
  const TorusDomain dom = TorusDomain::square(32);
  SUBCASE("vacuum has zero energy") {
    CHECK(gl_energy(uniform_field(dom, Complex(1, 0), 0.1)).total == doctest::Approx(0.0));
  }
  SUBCASE("u = 0 is pure potential: 1/(4 eps^2) on the unit torus") {
    const Real eps = 0.1;
    CHECK(gl_energy(uniform_field(dom, Complex(0, 0), eps)).total ==
          doctest::Approx(1.0 / (4.0 * eps * eps)).epsilon(1e-12));
  }
  SUBCASE("density sums exactly to the total") {
    Rng rng(3);
    const ScalarField f = random_scalar_state(dom, 0.2, rng);
    const EnergyReport rep = gl_energy(f);
    CHECK(rep.density.sum() * dom.cell_volume() == doctest::Approx(rep.total).epsilon(1e-14));
    CHECK(rep.total == doctest::Approx(gl_energy_total(f)).epsilon(1e-14));
  }
  SUBCASE("tanh pair ansatz: 128^2 quadrature matches 256^2 to rel 1e-3") {
    const Real eps = 0.1;
    const Real e128 = gl_energy(analytic_pair_field(TorusDomain::square(128), eps)).total;
    const Real e256 = gl_energy(analytic_pair_field(TorusDomain::square(256), eps)).total;
    CHECK(std::abs(e128 - e256) / e256 < 1e-3);
  }
}

TEST_CASE("gl_residual") {
  const TorusDomain dom = TorusDomain::square(32);
  SUBCASE("vacuum and zero are exact solutions") {
    CHECK(gl_residual(uniform_field(dom, Complex(1, 0), 0.1)).abs().maxCoeff() == 0.0);
    CHECK(gl_residual(uniform_field(dom, Complex(0, 0), 0.1)).abs().maxCoeff() == 0.0);
  }
  SUBCASE("plane wave: discrete Laplacian eigenvalue") {
    const Real eps = 0.1, L = dom.periods[0], h = dom.spacing(0);
    ScalarField f;
    f.dom = dom;
    f.epsilon = eps;
    f.values = ArrayXcd::Zero(dom.sites());
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const Point x = dom.site_point(dom.coords(idx));
      const Real ph = 2.0 * kPi * x[0] / L;
      f.values[idx] = Complex(std::cos(ph), std::sin(ph));
    }
    const Real symbol = (2.0 - 2.0 * std::cos(2.0 * kPi * h / L)) / (h * h);
    const ArrayXcd r = gl_residual(f);
    Real err = 0;
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx)
      err = std::max(err, std::abs(r[idx] - (-eps * eps * symbol) * f.values[idx]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("gl_gradient is the L2 gradient of the energy") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(5);
  const ScalarField f = random_scalar_state(dom, 0.25, rng);

  SUBCASE("identity with the residual") {
    const ArrayXcd g = gl_gradient(f);
    const ArrayXcd r = gl_residual(f);
    CHECK((g + r / (f.epsilon * f.epsilon)).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("directional finite differences, rel 1e-6") {
    Rng r2(7);
    ScalarField phi = random_scalar_state(dom, 0.25, r2, 2, 0.5, Complex(0, 0));
    const ArrayXcd g = gl_gradient(f);
    const Real pairing = l2_inner(dom, g, phi.values);
    const Real s = 1e-6;
    ScalarField fp = f, fm = f;
    fp.values = f.values + s * phi.values;
    fm.values = f.values - s * phi.values;
    const Real fd = (gl_energy_total(fp) - gl_energy_total(fm)) / (2.0 * s);
    CHECK(std::abs(pairing - fd) / std::max(std::abs(fd), 1e-12) < 1e-6);
  }
  SUBCASE("vacuum gradient vanishes") {
    CHECK(gl_gradient(uniform_field(dom, Complex(1, 0), 0.15)).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gl_stress") {
  const TorusDomain dom = TorusDomain::square(32);
  SUBCASE("constant field: S = 0 and T = W/eps^2 g") {
    const Real eps = 0.1;
    const ScalarField f = uniform_field(dom, Complex(0.6, 0.3), eps);
    const StressField s = gl_stress(f);
    const Real wv = double_well(Complex(0.6, 0.3)) / (eps * eps);
    CHECK(s.S[0].norm() == doctest::Approx(0.0));
    CHECK(s.T[5](0, 0) == doctest::Approx(wv).epsilon(1e-13));
    CHECK(s.T[5](1, 1) == doctest::Approx(wv).epsilon(1e-13));
    CHECK(s.T[5](0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("plane wave: S = symbol^2 diag(1,0)") {
    const Real eps = 0.1, L = dom.periods[0], h = dom.spacing(0);
    ScalarField f;
    f.dom = dom;
    f.epsilon = eps;
    f.values = ArrayXcd::Zero(dom.sites());
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const Point x = dom.site_point(dom.coords(idx));
      const Real ph = 2.0 * kPi * x[0] / L;
      f.values[idx] = Complex(std::cos(ph), std::sin(ph));
    }
    // central-difference symbol sin(kh)/h
    const Real k = 2.0 * kPi / L;
    const Real sym = std::sin(k * h) / h;
    const StressField s = gl_stress(f);
    CHECK(s.S[7](0, 0) == doctest::Approx(sym * sym).epsilon(1e-12));
    CHECK(s.S[7](1, 1) == doctest::Approx(0.0));
    CHECK(s.S[7](0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("trace identities") {
    Rng rng(11);
    const ScalarField f = random_scalar_state(dom, 0.2, rng);
    const StressField s = gl_stress(f);
    for (std::int64_t idx : {std::int64_t(0), std::int64_t(100), std::int64_t(777)}) {
      const auto c = dom.coords(idx);
      Real grad2 = 0;
      for (int j = 0; j < 2; ++j) {
        const Complex g = (f.values[dom.shifted_index(c, j, +1)] -
                           f.values[dom.shifted_index(c, j, -1)]) /
                          (2.0 * dom.spacing(j));
        grad2 += std::norm(g);
      }
      CHECK(s.S[idx].trace() == doctest::Approx(grad2).epsilon(1e-12));
      CHECK(s.T[idx].trace() ==
            doctest::Approx(2.0 * s.energy_density[idx] - grad2).epsilon(1e-12));
    }
  }
  SUBCASE("S is positive semidefinite") {
    Rng rng(13);
    const ScalarField f = random_scalar_state(dom, 0.2, rng);
    const StressField s = gl_stress(f);
    for (std::int64_t idx = 0; idx < dom.sites(); idx += 37) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.S[idx].topLeftCorner<2, 2>());
      CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    }
  }
}

TEST_CASE("gl_energy_measure") {
  const TorusDomain dom = TorusDomain::square(32);
  SUBCASE("vacuum measure vanishes") {
    CHECK(gl_energy_measure(uniform_field(dom, Complex(1, 0), 0.1)).total ==
          doctest::Approx(0.0));
  }
  SUBCASE("eps >= 1 is rejected") {
    ScalarField f = uniform_field(dom, Complex(1, 0), 1.0);
    CHECK_THROWS_AS((void)gl_energy_measure(f), std::invalid_argument);
  }
  SUBCASE("translation invariance of the measure") {
    Rng rng(17);
    const ScalarField f = random_scalar_state(dom, 0.2, rng);
    ScalarField g = f;
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const auto c = dom.coords(idx);
      g.values[idx] = f.values[dom.index(dom.wrap(c[0] + 5, 0), dom.wrap(c[1] - 3, 1))];
    }
    const EnergyReport mf = gl_energy_measure(f);
    const EnergyReport mg = gl_energy_measure(g);
    CHECK(mf.total == doctest::Approx(mg.total).epsilon(1e-13));
  }
  SUBCASE("phase rotation invariance of the energy") {
    Rng rng(19);
    const ScalarField f = random_scalar_state(dom, 0.2, rng);
    ScalarField g = f;
    g.values *= Complex(std::cos(0.7), std::sin(0.7));
    CHECK(gl_energy_total(f) == doctest::Approx(gl_energy_total(g)).epsilon(1e-13));
  }
}

TEST_CASE("gl_hessian_apply") {
  const TorusDomain dom = TorusDomain::square(16);
  const Real eps = 0.15;

  SUBCASE("vacuum, real constant direction: H phi = 2 phi / eps^2") {
    const ScalarField f = uniform_field(dom, Complex(1, 0), eps);
    const ArrayXcd phi = ArrayXcd::Constant(dom.sites(), Complex(0.3, 0));
    const ArrayXcd H = gl_hessian_apply(f, phi);
    CHECK((H - 2.0 * phi / (eps * eps)).abs().maxCoeff() < 1e-13);
  }
  SUBCASE("quadratic form matches second differences of the energy, rel 1e-5") {
    Rng rng(23);
    const ScalarField f = random_scalar_state(dom, 0.25, rng);
    Rng r2(29);
    const ScalarField phi = random_scalar_state(dom, 0.25, r2, 2, 0.6, Complex(0.1, -0.2));
    const ArrayXcd H = gl_hessian_apply(f, phi.values);
    const Real q = l2_inner(dom, H, phi.values);
    const Real s = 1e-4;
    ScalarField fp = f, fm = f;
    fp.values = f.values + s * phi.values;
    fm.values = f.values - s * phi.values;
    const Real fd = (gl_energy_total(fp) - 2.0 * gl_energy_total(f) + gl_energy_total(fm)) /
                    (s * s);
    CHECK(std::abs(q - fd) / std::max(std::abs(fd), 1e-10) < 1e-5);
  }
  SUBCASE("self-adjointness, rel 1e-10") {
    Rng rng(31);
    const ScalarField f = random_scalar_state(dom, 0.25, rng);
    Rng ra(33), rb(35);
    const ScalarField a = random_scalar_state(dom, 0.25, ra, 2, 0.7, Complex(0, 0));
    const ScalarField b = random_scalar_state(dom, 0.25, rb, 2, 0.7, Complex(0, 0));
    const Real lhs = l2_inner(dom, gl_hessian_apply(f, a.values), b.values);
    const Real rhs = l2_inner(dom, a.values, gl_hessian_apply(f, b.values));
    CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12}) < 1e-10);
  }
  SUBCASE("Hessian linearises the gradient") {
    Rng rng(37);
    const ScalarField f = random_scalar_state(dom, 0.25, rng);
    Rng r2(41);
    const ScalarField phi = random_scalar_state(dom, 0.25, r2, 1, 0.5, Complex(0, 0));
    const Real s = 1e-5;
    ScalarField fp = f, fm = f;
    fp.values = f.values + s * phi.values;
    fm.values = f.values - s * phi.values;
    const ArrayXcd fd = (gl_gradient(fp) - gl_gradient(fm)) / (2.0 * s);
    const ArrayXcd H = gl_hessian_apply(f, phi.values);
    CHECK((fd - H).abs().maxCoeff() / std::max(H.abs().maxCoeff(), 1e-10) < 1e-5);
  }
}
