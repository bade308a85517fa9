#pragma once

#include "ivlab/metric.hpp"
#include "ivlab/vector_field.hpp"

namespace ivlab {

/// Pointwise first/second t-derivatives of the pulled-back metric
/// g^t = (Phi^t)^* g and of its inverse and volume element, at t = 0.
struct MetricVariation {
  Mat3 gdot = Mat3::Zero();
  Mat3 gddot = Mat3::Zero();
  Mat3 gdot_inv = Mat3::Zero();
  Mat3 gddot_inv = Mat3::Zero();
  Real vol_dot = 0;
  Real vol_ddot = 0;

  // Scalar ingredients, exposed for the variation formulas.
  Real div_X = 0;          // covariant divergence of X
  Real div_grad_XX = 0;    // div(grad_X X)
  Real ric_XX = 0;         // Ric(X, X)
  Real t_tm_XX = 0;        // T_TM(X, X)
};

/// Flow of a periodic vector field on the torus; fixed-step RK4 with at
/// least 64 steps per unit time (well below the t/16 step bound), wrapped
/// into the fundamental domain.
Point flow_map(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x);

/// Flow together with its differential d Phi^t obtained by integrating the
/// variational equation alongside, unwrapped (covering-space) endpoint.
void flow_map_jet(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x,
                  Point& y_unwrapped, Mat3& dphi);

/// (d Phi^t)^T g(Phi^t x) (d Phi^t).
Mat3 pullback_metric(const TorusDomain& dom, const VectorFieldSpec& X, Real t, const Point& x,
                     const MetricSpec& g);

/// All six quantities of the pullback-derivative lemma at a point.
MetricVariation metric_variation(const VectorFieldSpec& X, const Point& x, const MetricSpec& g);

enum class Subbundle { TM, TGamma, NGamma };

/// T_P(X,X) = sum over an orthonormal frame {e_i} of P of
/// <grad_{e_i} X, e_k><grad_{e_k} X, e_i>. The frame columns span P and must
/// be g-orthonormal at x.
Real t_tensor(const VectorFieldSpec& X, const Point& x, const MetricSpec& g,
              const MatrixXd& frame);

}  // namespace ivlab
