#include "ivlab/metric.hpp"

namespace ivlab {

MetricSpec MetricSpec::analytic_test(int n, const std::array<Real, 3>& periods, Real amplitude) {
  // g_ij = e^{2 lambda} delta_ij + a * s_i(x) s_j(x), with
  // lambda = a * cos(2 pi x_0 / L_0) * sin(2 pi x_1 / L_1) and
  // s_i = a * sin(2 pi x_i / L_i + i). All derivatives are closed-form.
  const Real a = amplitude;
  auto eval = [n, periods, a](const Point& x) {
    MetricJet jet;
    std::array<Real, 3> w{};
    for (int i = 0; i < n; ++i) w[i] = 2.0 * kPi / periods[i];

    const Real c0 = std::cos(w[0] * x[0]), s0 = std::sin(w[0] * x[0]);
    const Real c1 = std::cos(w[1] * x[1]), s1 = std::sin(w[1] * x[1]);
    const Real lam = a * c0 * s1;
    // dlam[k], ddlam[k][l]
    Point dlam = Point::Zero();
    Mat3 ddlam = Mat3::Zero();
    dlam[0] = -a * w[0] * s0 * s1;
    dlam[1] = a * w[1] * c0 * c1;
    ddlam(0, 0) = -a * w[0] * w[0] * c0 * s1;
    ddlam(1, 1) = -a * w[1] * w[1] * c0 * s1;
    ddlam(0, 1) = ddlam(1, 0) = -a * w[0] * w[1] * s0 * c1;

    std::array<Real, 3> s{}, ds{}, dds{};
    for (int i = 0; i < n; ++i) {
      const Real ph = w[i] * x[i] + i;
      s[i] = a * std::sin(ph);
      ds[i] = a * w[i] * std::cos(ph);
      dds[i] = -a * w[i] * w[i] * std::sin(ph);
    }

    const Real e2 = std::exp(2.0 * lam);
    Mat3 g = Mat3::Identity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = e2 * (i == j ? 1.0 : 0.0) + s[i] * s[j];
    jet.g = g;

    auto dsi = [&](int i, int k) { return i == k ? ds[i] : 0.0; };
    auto ddsi = [&](int i, int k, int l) { return (i == k && i == l) ? dds[i] : 0.0; };

    for (int k = 0; k < n; ++k) {
      Mat3 d = Mat3::Zero();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          d(i, j) = 2.0 * dlam[k] * e2 * (i == j ? 1.0 : 0.0) + dsi(i, k) * s[j] + s[i] * dsi(j, k);
      jet.dg[k] = d;
    }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Mat3 d = Mat3::Zero();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const Real de = (4.0 * dlam[k] * dlam[l] + 2.0 * ddlam(k, l)) * e2;
            d(i, j) = de * (i == j ? 1.0 : 0.0) + ddsi(i, k, l) * s[j] + dsi(i, k) * dsi(j, l) +
                      dsi(i, l) * dsi(j, k) + s[i] * ddsi(j, k, l);
          }
        jet.ddg[k][l] = d;
      }
    return jet;
  };
  return MetricSpec::analytic(n, eval);
}

void MetricSpec::christoffel(const MetricJet& j, std::array<Mat3, 3>& gamma) const {
  const int n = n_;
  Mat3 ginv = Mat3::Identity();
  ginv.topLeftCorner(n, n) = j.g.topLeftCorner(n, n).inverse();
  for (auto& m : gamma) m = Mat3::Zero();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        Real s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (j.dg[i](jj, l) + j.dg[jj](i, l) - j.dg[l](i, jj));
        gamma[k](i, jj) = 0.5 * s;
      }
}

void MetricSpec::christoffel_jet(const MetricJet& j, std::array<Mat3, 3>& gamma,
                                 std::array<std::array<Mat3, 3>, 3>& dgamma) const {
  const int n = n_;
  christoffel(j, gamma);
  Mat3 ginv = Mat3::Identity();
  ginv.topLeftCorner(n, n) = j.g.topLeftCorner(n, n).inverse();
  // d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
  std::array<Mat3, 3> dginv{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  for (int m = 0; m < n; ++m)
    dginv[m].topLeftCorner(n, n) = -(ginv * j.dg[m] * ginv).topLeftCorner(n, n);

  for (auto& row : dgamma) row = {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          Real s = 0;
          for (int l = 0; l < n; ++l) {
            s += dginv[m](k, l) * (j.dg[i](jj, l) + j.dg[jj](i, l) - j.dg[l](i, jj));
            s += ginv(k, l) * (j.ddg[m][i](jj, l) + j.ddg[m][jj](i, l) - j.ddg[m][l](i, jj));
          }
          dgamma[m][k](i, jj) = 0.5 * s;
        }
}

void MetricSpec::curvature(const MetricJet& j, std::array<std::array<Mat3, 3>, 3>& R) const {
  const int n = n_;
  std::array<Mat3, 3> gamma;
  std::array<std::array<Mat3, 3>, 3> dgamma;
  christoffel_jet(j, gamma, dgamma);

  for (auto& row : R) row = {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  // R(e_a, e_b, e_c, e_d) = g_{ld} [ d_b Gamma^l_ac - d_a Gamma^l_bc
  //                                  + Gamma^m_ac Gamma^l_bm - Gamma^m_bc Gamma^l_am ]
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Real s = 0;
          for (int l = 0; l < n; ++l) {
            Real t = dgamma[b][l](a, c) - dgamma[a][l](b, c);
            for (int m = 0; m < n; ++m)
              t += gamma[m](a, c) * gamma[l](b, m) - gamma[m](b, c) * gamma[l](a, m);
            s += j.g(l, d) * t;
          }
          R[a][b](c, d) = s;
        }
}

}  // namespace ivlab
