#include "ivlab/flow.hpp"

namespace ivlab {

namespace {
// At least 8 steps, 320 per unit time: keeps the fourth-order error below the
// 1e-10 oracle budget while small-t resampling stays cheap.
int step_count(Real t) { return std::max(8, static_cast<int>(std::ceil(320.0 * std::abs(t)))); }
}  // namespace

void flow_map_jet(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x,
                  Point& y, Mat3& J) {
  y = x;
  J = Mat3::Identity();
  if (t == 0.0) return;
  const int n = dom.n;
  const int steps = step_count(t);
  const Real dt = t / steps;

  auto rhs = [&](const Point& p, const Mat3& M, Point& dp, Mat3& dM) {
    const VecJet j = X.jet(p);
    dp = j.X;
    // d/dt dPhi = (dX at Phi) * dPhi, with (dX)(l,k) = d_k X^l acting on columns.
    dM = Mat3::Zero();
    for (int l = 0; l < n; ++l)
      for (int c = 0; c < n; ++c) {
        Real s = 0;
        for (int k = 0; k < n; ++k) s += j.dX(k, l) * M(k, c);
        dM(l, c) = s;
      }
  };

  Point k1, k2, k3, k4;
  Mat3 K1, K2, K3, K4;
  for (int s = 0; s < steps; ++s) {
    rhs(y, J, k1, K1);
    rhs(y + 0.5 * dt * k1, J + 0.5 * dt * K1, k2, K2);
    rhs(y + 0.5 * dt * k2, J + 0.5 * dt * K2, k3, K3);
    rhs(y + dt * k3, J + dt * K3, k4, K4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    J += (dt / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
  }
}

Point flow_map(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x) {
  if (t == 0.0) return dom.wrap_point(x);
  Point y;
  Mat3 J;
  flow_map_jet(dom, X, t, x, y, J);
  return dom.wrap_point(y);
}

Mat3 pullback_metric(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x,
                     const MetricSpec& g) {
  const int n = dom.n;
  Point y;
  Mat3 J;
  flow_map_jet(dom, X, t, x, y, J);
  Mat3 gy = g.value(dom.wrap_point(y));
  Mat3 out = Mat3::Zero();
  out.topLeftCorner(n, n) =
      J.topLeftCorner(n, n).transpose() * gy.topLeftCorner(n, n) * J.topLeftCorner(n, n);
  return out;
}

Real t_tensor(const VectorFieldSpec& X, const Point& x, const MetricSpec& g,
              const MatrixXd& frame) {
  const int n = g.dim();
  const int p = static_cast<int>(frame.cols());
  const VecJet xj = X.jet(x);
  const MetricJet mj = g.jet(x);
  std::array<Mat3, 3> gamma;
  g.christoffel(mj, gamma);

  // covD(i,l) = (grad_i X)^l in coordinates.
  Mat3 covD = Mat3::Zero();
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      Real s = xj.dX(i, l);
      for (int k = 0; k < n; ++k) s += gamma[l](i, k) * xj.X[k];
      covD(i, l) = s;
    }

  // A(u, v) = <grad_u X, v> for frame vectors u, v.
  MatrixXd A(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      Real s = 0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            s += frame(i, a) * covD(i, l) * mj.g(l, m) * frame(m, b);
      A(a, b) = s;
    }
  Real t = 0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) t += A(a, b) * A(b, a);
  return t;
}

MetricVariation metric_variation(const VectorFieldSpec& X, const Point& x, const MetricSpec& g) {
  const int n = g.dim();
  MetricVariation out;
  const VecJet xj = X.jet(x);
  const MetricJet mj = g.jet(x);
  std::array<Mat3, 3> gamma;
  std::array<std::array<Mat3, 3>, 3> dgamma;
  g.christoffel_jet(mj, gamma, dgamma);
  std::array<std::array<Mat3, 3>, 3> R;
  g.curvature(mj, R);

  MatrixXd gmat = mj.g.topLeftCorner(n, n);
  MatrixXd ginv = gmat.inverse();

  // (grad_i X)^l and its coordinate derivative d_m (grad_i X)^l.
  Mat3 covD = Mat3::Zero();
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      Real s = xj.dX(i, l);
      for (int k = 0; k < n; ++k) s += gamma[l](i, k) * xj.X[k];
      covD(i, l) = s;
    }

  // grad_X X and grad_i (grad_X X)
  Point gXX = Point::Zero();
  for (int l = 0; l < n; ++l) {
    Real s = 0;
    for (int k = 0; k < n; ++k) {
      s += xj.X[k] * xj.dX(k, l);
      for (int m = 0; m < n; ++m) s += gamma[l](k, m) * xj.X[k] * xj.X[m];
    }
    gXX[l] = s;
  }
  Mat3 d_gXX = Mat3::Zero();  // d_i (grad_X X)^l, coordinate derivative
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      Real s = 0;
      for (int k = 0; k < n; ++k) {
        s += xj.dX(i, k) * xj.dX(k, l) + xj.X[k] * xj.ddX[i](k, l);
        for (int m = 0; m < n; ++m)
          s += dgamma[i][l](k, m) * xj.X[k] * xj.X[m] +
               gamma[l](k, m) * (xj.dX(i, k) * xj.X[m] + xj.X[k] * xj.dX(i, m));
      }
      d_gXX(i, l) = s;
    }
  Mat3 cov_gXX = Mat3::Zero();  // (grad_i grad_X X)^l
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      Real s = d_gXX(i, l);
      for (int k = 0; k < n; ++k) s += gamma[l](i, k) * gXX[k];
      cov_gXX(i, l) = s;
    }

  // gdot_ij = <grad_i X, e_j> + <e_i, grad_j X>
  Mat3 gdot = Mat3::Zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Real s = 0;
      for (int l = 0; l < n; ++l) s += covD(i, l) * mj.g(l, j) + covD(j, l) * mj.g(l, i);
      gdot(i, j) = s;
    }
  if (!is_symmetric(gdot.topLeftCorner(n, n), 1e-10))
    throw std::runtime_error("metric_variation: non-symmetric gdot");

  // gddot_ij = <grad_i grad_X X, e_j> + <grad_j grad_X X, e_i>
  //            + 2 <grad_i X, grad_j X> - 2 R(X, e_i, X, e_j)
  Mat3 gddot = Mat3::Zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Real s = 0;
      for (int l = 0; l < n; ++l) {
        s += cov_gXX(i, l) * mj.g(l, j) + cov_gXX(j, l) * mj.g(l, i);
        for (int m = 0; m < n; ++m) s += 2.0 * covD(i, l) * mj.g(l, m) * covD(j, m);
      }
      Real rr = 0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) rr += xj.X[a] * xj.X[c] * R[a][i](c, j);
      gddot(i, j) = s - 2.0 * rr;
    }

  MatrixXd gd = gdot.topLeftCorner(n, n);
  MatrixXd gdd = gddot.topLeftCorner(n, n);
  out.gdot = gdot;
  out.gddot = gddot;
  out.gdot_inv.topLeftCorner(n, n) = -(ginv * gd * ginv);
  out.gddot_inv.topLeftCorner(n, n) = 2.0 * ginv * gd * ginv * gd * ginv - ginv * gdd * ginv;

  // Scalars.
  Real divX = 0;
  for (int i = 0; i < n; ++i) divX += covD(i, i);
  Real div_gXX = 0;
  for (int i = 0; i < n; ++i) div_gXX += cov_gXX(i, i);

  // Orthonormal frame for TM via Cholesky of g (columns are frame vectors).
  Eigen::LLT<MatrixXd> llt(gmat);
  MatrixXd Lt = llt.matrixL().transpose();
  MatrixXd frame = Lt.inverse();  // g(frame_a, frame_b) = delta_ab

  Real ric = 0;
  for (int a = 0; a < n; ++a) {
    // e_a = frame.col(a): Ric(X,X) = sum_a R(X, e_a, X, e_a)
    Real s = 0;
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) {
        Real rbd = 0;
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < n; ++c) rbd += xj.X[i] * xj.X[c] * R[i][b](c, d);
        s += frame(b, a) * frame(d, a) * rbd;
      }
    ric += s;
  }

  MatrixXd frameM = frame;
  Real ttm = 0;
  {
    MatrixXd A(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Real s = 0;
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m)
              s += frameM(i, a) * covD(i, l) * mj.g(l, m) * frameM(m, b);
        A(a, b) = s;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) ttm += A(a, b) * A(b, a);
  }

  const Real sqrtg = std::sqrt(gmat.determinant());
  out.div_X = divX;
  out.div_grad_XX = div_gXX;
  out.ric_XX = ric;
  out.t_tm_XX = ttm;
  out.vol_dot = divX * sqrtg;
  out.vol_ddot = (div_gXX - ric - ttm + divX * divX) * sqrtg;
  return out;
}

}  // namespace ivlab
