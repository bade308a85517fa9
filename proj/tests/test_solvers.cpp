#include <doctest.h>

#include "ivlab/solve.hpp"

using namespace ivlab;

TEST_CASE("gl pair ansatz has the right topology") {
  const TorusDomain dom = TorusDomain::square(48);
  const Real eps = 0.1;
  Point c;
  c << 0.25, 0.5, 0;
  const ScalarField f = gl_pair_ansatz(dom, eps, c);

  SUBCASE("one +1 and one -1 winding at the prescribed centers") {
    const WindingCensus w = winding_census(f);
    CHECK(w.plus == 1);
    CHECK(w.minus == 1);
    REQUIRE(w.zeros.size() == 2);
    Real d0 = std::min(dom.distance(w.zeros[0], Point(0.25, 0.5, 0)),
                       dom.distance(w.zeros[0], Point(0.75, 0.5, 0)));
    Real d1 = std::min(dom.distance(w.zeros[1], Point(0.25, 0.5, 0)),
                       dom.distance(w.zeros[1], Point(0.75, 0.5, 0)));
    CHECK(d0 < 2.0 * dom.spacing(0));
    CHECK(d1 < 2.0 * dom.spacing(0));
  }
  SUBCASE("lies in the involution fixed-point set") {
    const int half = dom.grid[0] / 2;
    Real err = 0;
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const auto cc = dom.coords(idx);
      const Complex other = f.values[dom.index(dom.wrap(cc[0] + half, 0), cc[1])];
      err = std::max(err, std::abs(f.values[idx] - std::conj(other)));
    }
    CHECK(err < 1e-12);
  }
  SUBCASE("centers closer than 4 eps are rejected") {
    CHECK_THROWS_AS((void)gl_pair_ansatz(dom, 0.2, c), std::invalid_argument);
  }
}

TEST_CASE("minimize: vacuum start returns immediately") {
  const TorusDomain dom = TorusDomain::square(16);
  ScalarField f;
  f.dom = dom;
  f.epsilon = 0.15;
  f.values = ArrayXcd::Constant(dom.sites(), Complex(1, 0));
  SolveConfig cfg;
  cfg.tolerance = 1e-10;
  const CriticalPoint cp = minimize(f, cfg);
  CHECK(cp.iterations == 0);
  CHECK(cp.residual_sup <= 1e-10);
  CHECK(cp.energy == doctest::Approx(0.0));
}

TEST_CASE("minimize: involution-constrained pair on a small grid") {
  const TorusDomain dom = TorusDomain::square(48);
  const Real eps = 0.1;
  const ScalarField f0 = gl_pair_ansatz(dom, eps, Point(0.25, 0.5, 0));
  SolveConfig cfg;
  cfg.tolerance = 1e-7;
  cfg.max_iters = 60000;
  cfg.constraint = SolveConfig::Constraint::gl_pair_involution;
  const CriticalPoint cp = minimize(f0, cfg);
  const ScalarField& f = std::get<ScalarField>(cp.state);

  SUBCASE("converged below tolerance, monotone energy") {
    CHECK(cp.residual_sup <= cfg.tolerance);
    CHECK(cp.energy <= gl_energy_total(f0) + 1e-12);
  }
  SUBCASE("the full unconstrained residual is small (symmetric criticality)") {
    CHECK(gl_residual(f).abs().maxCoeff() <= cfg.tolerance);
  }
  SUBCASE("winding pattern preserved") {
    const WindingCensus w = winding_census(f);
    CHECK(w.plus == 1);
    CHECK(w.minus == 1);
  }
  SUBCASE("saddle witness: separation perturbation strictly decreases energy") {
    // Move both zeros toward each other (violating the involution) and relax
    // a little without the constraint: the energy must drop below cp.energy.
    ScalarField g = f;
    // asymmetric perturbation along the separation direction
    Rng rng(4);
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const Point x = dom.site_point(dom.coords(idx));
      const Real bump = 0.05 * std::sin(2.0 * kPi * x[0] / dom.periods[0]);
      g.values[idx] *= Complex(std::cos(bump), std::sin(bump));
    }
    SolveConfig c2;
    c2.tolerance = 1e-9;
    c2.max_iters = 400;  // a short relaxation is enough to dip below the saddle
    const CriticalPoint cp2 = minimize(g, c2);
    CHECK(cp2.energy < cp.energy - 1e-6);
  }
}

TEST_CASE("minimize: ymh degree-1 vortex on a small grid") {
  const TorusDomain dom = TorusDomain::square(48);
  const Real eps = 0.1;
  const GaugePair p0 = ymh_vortex_ansatz(dom, eps, 1, Point(0.5, 0.5, 0));
  SolveConfig cfg;
  cfg.tolerance = 1e-7;
  cfg.max_iters = 60000;
  const CriticalPoint cp = minimize(p0, cfg);
  const GaugePair& p = std::get<GaugePair>(cp.state);

  SUBCASE("converged with degree preserved") {
    CHECK(cp.residual_sup <= cfg.tolerance);
    CHECK(bundle_degree(p) == 1);
  }
  SUBCASE("energy sits near the quantised value 2 pi d") {
    CHECK(std::abs(cp.energy / (2.0 * kPi) - 1.0) < 0.1);
  }
  SUBCASE("ansatz energy within 25 percent of the converged energy") {
    CHECK(std::abs(ymh_energy_total(p0) - cp.energy) / cp.energy < 0.25);
  }
}

TEST_CASE("epsilon_continuation") {
  const TorusDomain dom = TorusDomain::square(48);
  const GaugePair p0 = ymh_vortex_ansatz(dom, 0.16, 1, Point(0.5, 0.5, 0));
  SolveConfig cfg;
  cfg.tolerance = 1e-6;
  cfg.max_iters = 40000;

  SUBCASE("single-entry ladder from its own converged point is idempotent") {
    cfg.ladder = {0.16};
    const auto stages = epsilon_continuation(p0, cfg);
    REQUIRE(stages.size() == 1);
    REQUIRE(stages[0].point.has_value());
    const auto again = epsilon_continuation(stages[0].point->state, cfg);
    REQUIRE(again[0].point.has_value());
    CHECK(again[0].point->iterations <= 1);
    CHECK(std::abs(again[0].point->energy - stages[0].point->energy) < 1e-8);
  }
  SUBCASE("descending ladder: energies approach 2 pi and degree survives") {
    cfg.ladder = {0.16, 0.12, 0.1};
    const auto stages = epsilon_continuation(p0, cfg);
    REQUIRE(stages.size() == 3);
    Real prev_dev = std::numeric_limits<Real>::infinity();
    for (const auto& st : stages) {
      REQUIRE(st.point.has_value());
      CHECK(bundle_degree(std::get<GaugePair>(st.point->state)) == 1);
      const Real dev = std::abs(st.point->energy / (2.0 * kPi) - 1.0);
      CHECK(dev <= prev_dev + 0.01);
      prev_dev = dev;
    }
  }
  SUBCASE("ladder entries below the grid guard are skipped with a note") {
    cfg.ladder = {0.16, 0.03};
    const auto stages = epsilon_continuation(p0, cfg);
    REQUIRE(stages.size() == 2);
    CHECK(!stages[0].skipped);
    CHECK(stages[1].skipped);
    CHECK(!stages[1].note.empty());
  }
  SUBCASE("empty ladder is rejected") {
    cfg.ladder.clear();
    CHECK_THROWS_AS((void)epsilon_continuation(p0, cfg), std::invalid_argument);
  }
}
