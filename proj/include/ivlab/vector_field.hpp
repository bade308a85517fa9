#pragma once

#include "ivlab/core.hpp"

namespace ivlab {

/// Value, Jacobian and second derivatives of a vector field at a point.
/// dX(k,l) = d_k X^l, ddX[m](k,l) = d_m d_k X^l.
struct VecJet {
  Point X = Point::Zero();
  Mat3 dX = Mat3::Zero();
  std::array<Mat3, 3> ddX{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
};

/// Periodic smooth vector field given as a finite cosine sum per component,
///   X^l(x) = sum_t amp * cos(2 pi m . x / L + phase),
/// so all derivatives are exact. Every named family used by the experiments
/// is an instance of this.
class VectorFieldSpec {
 public:
  struct Term {
    int component = 0;
    Real amplitude = 0;
    std::array<int, 3> mode{0, 0, 0};
    Real phase = 0;
  };

  VectorFieldSpec() = default;
  VectorFieldSpec(int n, std::array<Real, 3> periods, std::vector<Term> terms)
      : n_(n), periods_(periods), terms_(std::move(terms)) {}

  static VectorFieldSpec constant(int n, std::array<Real, 3> periods, const Point& c);
  /// Random band-limited field: modes up to max_mode, decaying amplitudes.
  static VectorFieldSpec random_fourier(int n, std::array<Real, 3> periods, Rng& rng,
                                        int max_mode = 2, Real amplitude = 1.0);
  /// X^0 = amp * f(x_axis3) * sin(2 pi (x_0 - c_0)/L_0), X^1 = X^2 = 0.
  /// On a point/circle at transverse coordinates c this has
  /// gdot_N = diag(q, 0) on the component, so the limit theorem applies
  /// without a normal-determinant correction.
  static VectorFieldSpec normal_shear(int n, std::array<Real, 3> periods, const Point& center,
                                      Real amplitude);

  int dim() const { return n_; }
  VecJet jet(const Point& x) const;
  Point value(const Point& x) const { return jet(x).X; }
  Mat3 jacobian(const Point& x) const { return jet(x).dX; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  int n_ = 2;
  std::array<Real, 3> periods_{1, 1, 1};
  std::vector<Term> terms_;
};

}  // namespace ivlab
