#pragma once

#include "ivlab/core.hpp"

namespace ivlab {

/// Pointwise value of a metric together with first and second coordinate
/// derivatives; only the leading n x n block is meaningful.
struct MetricJet {
  Mat3 g = Mat3::Identity();
  std::array<Mat3, 3> dg{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  std::array<std::array<Mat3, 3>, 3> ddg;
  MetricJet() {
    for (auto& row : ddg) row = {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  }
};

/// Flat or analytic ambient metric. Analytic metrics are used for pointwise
/// tensor calculus only; the discrete field energies always run flat.
class MetricSpec {
 public:
  enum class Kind { flat, analytic };

  MetricSpec() = default;
  static MetricSpec flat(int n) {
    MetricSpec m;
    m.kind_ = Kind::flat;
    m.n_ = n;
    return m;
  }
  static MetricSpec analytic(int n, std::function<MetricJet(const Point&)> eval) {
    MetricSpec m;
    m.kind_ = Kind::analytic;
    m.n_ = n;
    m.eval_ = std::move(eval);
    return m;
  }

  /// Mildly curved periodic test metric: g = exp(2*lambda) * (I + sym bump),
  /// closed-form derivatives, SPD for small amplitudes.
  static MetricSpec analytic_test(int n, const std::array<Real, 3>& periods, Real amplitude = 0.05);

  Kind kind() const { return kind_; }
  int dim() const { return n_; }
  bool is_flat() const { return kind_ == Kind::flat; }

  MetricJet jet(const Point& x) const {
    if (kind_ == Kind::flat) return MetricJet();
    MetricJet j = eval_(x);
    Eigen::LLT<MatrixXd> llt(MatrixXd(j.g.topLeftCorner(n_, n_)));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("MetricSpec: metric not positive definite at queried point");
    return j;
  }
  Mat3 value(const Point& x) const { return jet(x).g; }

  /// Christoffel symbols Gamma[k](i,j) = Gamma^k_ij and their first
  /// derivatives dGamma[m][k](i,j) = d_m Gamma^k_ij.
  void christoffel(const MetricJet& j, std::array<Mat3, 3>& gamma) const;
  void christoffel_jet(const MetricJet& j, std::array<Mat3, 3>& gamma,
                       std::array<std::array<Mat3, 3>, 3>& dgamma) const;

  /// Curvature with the convention
  ///   R(V,W,Y,Z) = <(grad_W grad_V - grad_V grad_W - grad_[W,V]) Y, Z>,
  /// returned as R[a][b](c,d) = R(e_a, e_b, e_c, e_d) in coordinates.
  /// With this sign, Ric(X,X) = sum_i R(X, e_i, X, e_i) over an orthonormal
  /// frame and is positive on round spheres.
  void curvature(const MetricJet& j, std::array<std::array<Mat3, 3>, 3>& R) const;

 private:
  Kind kind_ = Kind::flat;
  int n_ = 2;
  std::function<MetricJet(const Point&)> eval_;
};

}  // namespace ivlab
