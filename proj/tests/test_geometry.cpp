#include <doctest.h>

#include "ivlab/fields.hpp"
#include "ivlab/flow.hpp"
#include "ivlab/varifold.hpp"

using namespace ivlab;

namespace {

// Finite differences of the true pullback in t (5-point Richardson).
Mat3 fd_first(const std::function<Mat3(Real)>& g, Real tau) {
  return (8.0 * (g(tau) - g(-tau)) - (g(2 * tau) - g(-2 * tau))) / (12.0 * tau);
}
Mat3 fd_second(const std::function<Mat3(Real)>& g, Real tau) {
  return (-g(2 * tau) + 16.0 * g(tau) - 30.0 * g(0) + 16.0 * g(-tau) - g(-2 * tau)) /
         (12.0 * tau * tau);
}
Real fd_first_s(const std::function<Real(Real)>& g, Real tau) {
  return (8.0 * (g(tau) - g(-tau)) - (g(2 * tau) - g(-2 * tau))) / (12.0 * tau);
}
Real fd_second_s(const std::function<Real(Real)>& g, Real tau) {
  return (-g(2 * tau) + 16.0 * g(tau) - 30.0 * g(0) + 16.0 * g(-tau) - g(-2 * tau)) /
         (12.0 * tau * tau);
}

Real rel(Real a, Real b, Real floor = 1e-9) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Refined RK4 integration as an independent flow oracle.
Point fine_flow(const TorusDomain& dom, const VectorFieldSpec& X, Real t, Point x, int steps) {
  const Real dt = t / steps;
  Point y = x;
  for (int s = 0; s < steps; ++s) {
    const Point k1 = X.value(y);
    const Point k2 = X.value(y + 0.5 * dt * k1);
    const Point k3 = X.value(y + 0.5 * dt * k2);
    const Point k4 = X.value(y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return dom.wrap_point(y);
}

}  // namespace

TEST_CASE("flow_map basics") {
  const TorusDomain dom = TorusDomain::square(16);
  Rng rng(7);
  const VectorFieldSpec zero = VectorFieldSpec(2, dom.periods, {});
  Point x;
  x << 0.37, 0.81, 0;

  SUBCASE("zero field fixes points") {
    const Point y = flow_map(dom, zero, 0.3, x);
    CHECK((y - x).norm() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("t = 0 is the identity, exactly") {
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, rng);
    const Point y = flow_map(dom, X, 0.0, x);
    CHECK(y == x);
  }
  SUBCASE("constant field translates") {
    Point c;
    c << 0.5, -0.25, 0;
    const VectorFieldSpec X = VectorFieldSpec::constant(2, dom.periods, c);
    const Point y = flow_map(dom, X, 0.4, x);
    const Point expect = dom.wrap_point(Point(x + 0.4 * c));
    CHECK((y - expect).norm() < 1e-13);
  }
  SUBCASE("rotation-like field vs 10x finer integration") {
    Rng r2(21);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, r2, 2, 1.0);
    const Point y = flow_map(dom, X, 0.1, x);
    const Point fine = fine_flow(dom, X, 0.1, x, 64 * 10);
    CHECK((y - fine).norm() <= 1e-10);
  }
}

TEST_CASE("pullback_metric") {
  const TorusDomain dom = TorusDomain::square(16);
  const MetricSpec flat = MetricSpec::flat(2);
  Point x;
  x << 0.3, 0.6, 0;

  SUBCASE("flat metric, constant (Killing) field gives the identity") {
    Point c;
    c << 0.2, 0.9, 0;
    const VectorFieldSpec X = VectorFieldSpec::constant(2, dom.periods, c);
    const Mat3 g = pullback_metric(dom, X, 0.7, x, flat);
    CHECK((g.topLeftCorner(2, 2) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  }
  SUBCASE("shear matches (I + t grad X)^T (I + t grad X) to O(t^2)") {
    std::vector<VectorFieldSpec::Term> terms{
        {0, 0.8, {0, 1, 0}, -0.5 * kPi}};  // X^0 = 0.8 sin(2 pi x1 / L)
    const VectorFieldSpec X(2, dom.periods, terms);
    const Real t = 0.05;
    const Mat3 g = pullback_metric(dom, X, t, x, flat);
    const Mat3 A = X.jet(x).dX;  // A(k,l) = d_k X^l
    Eigen::Matrix2d D = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) D(i, j) += t * A(j, i);  // (dPhi)_ij = delta + t d_j X^i
    const Eigen::Matrix2d expect = D.transpose() * D;
    CHECK((g.topLeftCorner(2, 2) - expect).norm() < 5e-3 * t);  // O(t^2) agreement
  }
  SUBCASE("analytic metric at t = 0 returns g(x)") {
    const MetricSpec g = MetricSpec::analytic_test(2, dom.periods);
    Rng rng(3);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, rng);
    const Mat3 g0 = pullback_metric(dom, X, 0.0, x, g);
    CHECK((g0.topLeftCorner(2, 2) - g.value(x).topLeftCorner(2, 2)).norm() < 1e-14);
  }
}

TEST_CASE("metric_variation matches finite differences of the pullback") {
  const TorusDomain dom2 = TorusDomain::square(16);
  const Real tau = 1e-3;

  auto check_point = [&](const TorusDomain& dom, const MetricSpec& g, const VectorFieldSpec& X,
                         const Point& x, Real tol) {
    const MetricVariation mv = metric_variation(X, x, g);
    const int n = g.dim();
    auto gt = [&](Real t) { return pullback_metric(dom, X, t, x, g); };
    auto gt_inv = [&](Real t) {
      Mat3 m = Mat3::Identity();
      m.topLeftCorner(n, n) = gt(t).topLeftCorner(n, n).inverse().eval();
      return m;
    };
    auto vol = [&](Real t) { return std::sqrt(gt(t).topLeftCorner(n, n).determinant()); };
    const Mat3 fd_gdot = fd_first(gt, tau);
    const Mat3 fd_gddot = fd_second(gt, tau);
    const Mat3 fd_gdot_inv = fd_first(gt_inv, tau);
    const Mat3 fd_gddot_inv = fd_second(gt_inv, tau);
    const Real fd_vdot = fd_first_s(vol, tau);
    const Real fd_vddot = fd_second_s(vol, tau);

    auto mrel = [&](const Mat3& a, const Mat3& b) {
      Real scale = std::max({a.norm(), b.norm(), 1e-6});
      return (a - b).topLeftCorner(n, n).norm() / scale;
    };
    CHECK(mrel(mv.gdot, fd_gdot) < tol);
    CHECK(mrel(mv.gddot, fd_gddot) < tol);
    CHECK(mrel(mv.gdot_inv, fd_gdot_inv) < tol);
    CHECK(mrel(mv.gddot_inv, fd_gddot_inv) < tol);
    CHECK(rel(mv.vol_dot, fd_vdot, 1e-6) < tol);
    CHECK(rel(mv.vol_ddot, fd_vddot, 1e-6) < tol);
  };

  SUBCASE("flat: constant field gives all zeros") {
    Point c;
    c << 1.0, -0.5, 0;
    const VectorFieldSpec X = VectorFieldSpec::constant(2, dom2.periods, c);
    Point x;
    x << 0.2, 0.7, 0;
    const MetricVariation mv = metric_variation(X, x, MetricSpec::flat(2));
    CHECK(mv.gdot.norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mv.gddot.norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mv.vol_dot == doctest::Approx(0.0));
    CHECK(mv.vol_ddot == doctest::Approx(0.0));
  }
  SUBCASE("flat shear: gdot off-diagonal only") {
    std::vector<VectorFieldSpec::Term> terms{{0, 0.8, {0, 1, 0}, -0.5 * kPi}};
    const VectorFieldSpec X(2, dom2.periods, terms);
    Point x = Point::Zero();  // sin = 0, cos = 1 there: d_1 X^0 = 0.8 * 2 pi / L
    const MetricVariation mv = metric_variation(X, x, MetricSpec::flat(2));
    const Real a = 0.8 * 2.0 * kPi / dom2.periods[1];
    CHECK(mv.gdot(0, 1) == doctest::Approx(a).epsilon(1e-12));
    CHECK(mv.gdot(0, 0) == doctest::Approx(0.0));
    CHECK(mv.gdot(1, 1) == doctest::Approx(0.0));
    CHECK(mv.vol_dot == doctest::Approx(0.0));
  }
  SUBCASE("flat: random fields match finite differences, rel 1e-6") {
    Rng rng(11);
    for (int trial = 0; trial < 8; ++trial) {
      Rng rt = rng.fork(trial);
      const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom2.periods, rt, 2, 0.7);
      Point x;
      x << rt.uniform(0, 1), rt.uniform(0, 1), 0;
      check_point(dom2, MetricSpec::flat(2), X, x, 1e-6);
    }
  }
  SUBCASE("analytic metric: random fields match finite differences, rel 1e-5") {
    const MetricSpec g = MetricSpec::analytic_test(2, dom2.periods, 0.05);
    Rng rng(13);
    for (int trial = 0; trial < 4; ++trial) {
      Rng rt = rng.fork(trial);
      const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom2.periods, rt, 2, 0.5);
      Point x;
      x << rt.uniform(0, 1), rt.uniform(0, 1), 0;
      check_point(dom2, g, X, x, 1e-5);
    }
  }
  SUBCASE("3D flat sanity") {
    const TorusDomain dom3 = TorusDomain::box(8, 8, 8, 1, 1, 1);
    Rng rng(17);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(3, dom3.periods, rng, 1, 0.5);
    Point x;
    x << 0.3, 0.5, 0.7;
    check_point(dom3, MetricSpec::flat(3), X, x, 1e-6);
  }
}

TEST_CASE("metric_variation inverse identities are exact algebra") {
  const TorusDomain dom = TorusDomain::square(16);
  const MetricSpec g = MetricSpec::analytic_test(2, dom.periods, 0.08);
  Rng rng(5);
  const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, rng, 2, 0.9);
  Point x;
  x << 0.41, 0.13, 0;
  const MetricVariation mv = metric_variation(X, x, g);
  const Eigen::Matrix2d G = g.value(x).topLeftCorner(2, 2);
  const Eigen::Matrix2d Gi = G.inverse();
  const Eigen::Matrix2d gd = mv.gdot.topLeftCorner(2, 2);
  const Eigen::Matrix2d gdd = mv.gddot.topLeftCorner(2, 2);
  const Eigen::Matrix2d id1 = -(Gi * gd * Gi);
  const Eigen::Matrix2d id2 = 2.0 * Gi * gd * Gi * gd * Gi - Gi * gdd * Gi;
  CHECK((mv.gdot_inv.topLeftCorner(2, 2) - id1).norm() < 1e-13 * (1 + id1.norm()));
  CHECK((mv.gddot_inv.topLeftCorner(2, 2) - id2).norm() < 1e-13 * (1 + id2.norm()));
}

TEST_CASE("t_tensor") {
  const TorusDomain dom = TorusDomain::square(16);
  const MetricSpec flat = MetricSpec::flat(2);
  Point x;
  x << 0.3, 0.8, 0;

  SUBCASE("constant field gives zero") {
    Point c;
    c << 1, 2, 0;
    const VectorFieldSpec X = VectorFieldSpec::constant(2, dom.periods, c);
    MatrixXd frame = MatrixXd::Identity(2, 2);
    CHECK(t_tensor(X, x, flat, frame) == doctest::Approx(0.0));
  }
  SUBCASE("strict shear has zero trace-pairing") {
    std::vector<VectorFieldSpec::Term> terms{{0, 0.8, {0, 1, 0}, -0.5 * kPi}};
    const VectorFieldSpec X(2, dom.periods, terms);
    MatrixXd frame = MatrixXd::Identity(2, 2);
    CHECK(t_tensor(X, Point::Zero(), flat, frame) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("random field matches brute-force frame sum") {
    Rng rng(23);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, rng, 2, 1.0);
    MatrixXd frame = MatrixXd::Identity(2, 2);
    const Real val = t_tensor(X, x, flat, frame);
    const Mat3 dX = X.jet(x).dX;
    Real brute = 0;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) brute += dX(i, k) * dX(k, i);
    CHECK(val == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("second variation of area on circles") {
  const TorusDomain dom = TorusDomain::box(16, 16, 16, 1.0, 1.0, 1.0);
  Varifold gamma;
  gamma.dom = dom;
  VarifoldComponent c;
  c.kind = VarifoldComponent::Kind::circle;
  c.center << 0.5, 0.5, 0;
  c.axis = 2;
  c.multiplicity = 1;
  gamma.components.push_back(c);

  SUBCASE("constant field gives zero") {
    Point cc;
    cc << 0.3, -1.0, 0.4;
    const VectorFieldSpec X = VectorFieldSpec::constant(3, dom.periods, cc);
    const AreaSecondVariation v = second_variation_area(gamma, X);
    CHECK(std::abs(v.total) < 1e-13);
  }
  SUBCASE("sinusoidal normal field: closed form (2 pi/L)^2 L/2") {
    const Real L = dom.periods[2];
    std::vector<VectorFieldSpec::Term> terms{{0, 1.0, {0, 0, 1}, -0.5 * kPi}};  // sin(2 pi x2/L) e0
    const VectorFieldSpec X(3, dom.periods, terms);
    const AreaSecondVariation v = second_variation_area(gamma, X, 512);
    const Real expect = std::pow(2.0 * kPi / L, 2) * (L / 2.0);
    CHECK(v.total == doctest::Approx(expect).epsilon(1e-10));
    CHECK(v.normal_grad_term == doctest::Approx(expect).epsilon(1e-10));
    CHECK(std::abs(v.t_tensor_term) < 1e-12);
    CHECK(std::abs(v.div_sq_term) < 1e-12);
  }
  SUBCASE("random field matches finite differences of flowed polyline length") {
    Rng rng(37);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(3, dom.periods, rng, 1, 0.4);
    const AreaSecondVariation v = second_variation_area(gamma, X, 1024);

    const int S = 1024;
    auto area = [&](Real t) {
      Real len = 0;
      Point prev = Point::Zero();
      for (int i = 0; i <= S; ++i) {
        Point p = c.center;
        p[2] = dom.periods[2] * (i % S) / S;
        Point q;
        Mat3 J;
        flow_map_jet(dom, X, t, p, q, J);  // unwrapped: polyline length on the cover
        if (i == S) q[2] += dom.periods[2];  // close the loop on the cover
        if (i > 0) len += (q - prev).norm();
        prev = q;
      }
      return len;
    };
    const Real fd = fd_second_s(area, 1e-2);
    CHECK(rel(v.total, fd, 1e-8) < 1e-4);
  }
  SUBCASE("polarization: quadratic form is bilinear-symmetric") {
    Rng rng(39);
    Rng r1 = rng.fork(1), r2 = rng.fork(2);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(3, dom.periods, r1, 1, 0.5);
    const VectorFieldSpec Y = VectorFieldSpec::random_fourier(3, dom.periods, r2, 1, 0.5);
    std::vector<VectorFieldSpec::Term> plus = X.terms(), minus = X.terms();
    for (auto t : Y.terms()) {
      plus.push_back(t);
      t.amplitude = -t.amplitude;
      minus.push_back(t);
    }
    const VectorFieldSpec XpY(3, dom.periods, plus), XmY(3, dom.periods, minus);
    const Real lhs = second_variation_area(gamma, XpY, 512).total +
                     second_variation_area(gamma, XmY, 512).total;
    const Real rhs = 2.0 * second_variation_area(gamma, X, 512).total +
                     2.0 * second_variation_area(gamma, Y, 512).total;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("resample_pullback") {
  const TorusDomain dom = TorusDomain::square(32);
  Rng rng(41);
  ScalarField f = random_scalar_state(dom, 0.2, rng, 2, 0.5);

  SUBCASE("t = 0 returns the field unchanged") {
    const ScalarField g = resample_pullback(f, VectorFieldSpec(2, dom.periods, {}), 0.0,
                                            ResampleMethod::cubic);
    CHECK((g.values - f.values).abs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("constant field of one spacing per unit t shifts by one site") {
    Point c;
    c << dom.spacing(0), 0, 0;
    const VectorFieldSpec X = VectorFieldSpec::constant(2, dom.periods, c);
    const ScalarField g = resample_pullback(f, X, 1.0, ResampleMethod::cubic);
    Real err = 0;
    for (int i = 0; i < dom.grid[0]; ++i)
      for (int j = 0; j < dom.grid[1]; ++j)
        err = std::max(err, std::abs(g.values[dom.index(i, j)] -
                                     f.values[dom.index(dom.wrap(i - 1, 0), j)]));
    CHECK(err < 1e-11);
  }
  SUBCASE("cubic resampling matches the analytic composition") {
    Rng r2(43);
    const VectorFieldSpec X = VectorFieldSpec::random_fourier(2, dom.periods, r2, 1, 0.6);
    const Real t = 0.05;
    const ScalarField g = resample_pullback(f, X, t, ResampleMethod::cubic);
    Real err = 0;
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const Point x = dom.site_point(dom.coords(idx));
      const Point y = flow_map(dom, X, -t, x);
      const Complex exact = eval_trig(f.spectral, dom.periods, dom.n, y);
      err = std::max(err, std::abs(g.values[idx] - exact));
    }
    const Real h = dom.spacing(0);
    CHECK(err < 5.0 * h * h * h);  // cubic interpolation error floor
  }
}
