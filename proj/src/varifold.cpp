#include "ivlab/varifold.hpp"

namespace ivlab {

AreaSecondVariation second_variation_area(const Varifold& gamma, const VectorFieldSpec& X,
                                          int samples) {
  gamma.validate();
  samples = std::max(samples, 256);
  AreaSecondVariation out;
  const int n = gamma.dom.n;

  for (const auto& comp : gamma.components) {
    if (comp.kind == VarifoldComponent::Kind::point) continue;  // 0-dimensional: no integrand

    const int ta = comp.axis;
    const auto na = Varifold::normal_axes(comp, n);
    const auto pts = gamma.samples(comp, samples);
    const Real ds = gamma.dom.periods[ta] / samples;

    Real t_term = 0, div_sq = 0, div_acc = 0, ngrad = 0;
    for (const Point& p : pts) {
      const VecJet j = X.jet(p);
      const Real dTT = j.dX(ta, ta);  // <grad_tangent X, tangent>
      t_term += -dTT * dTT;
      div_sq += dTT * dTT;
      // div_T(grad_X X) = d_ta (X^k d_k X^ta) = d_ta X^k d_k X^ta + X^k d_ta d_k X^ta
      Real acc = 0;
      for (int k = 0; k < n; ++k) acc += j.dX(ta, k) * j.dX(k, ta) + j.X[k] * j.ddX[ta](k, ta);
      div_acc += acc;
      for (int nu : {na[0], na[1]}) ngrad += j.dX(ta, nu) * j.dX(ta, nu);
    }
    const Real w = comp.multiplicity * ds;
    out.t_tensor_term += w * t_term;
    out.div_sq_term += w * div_sq;
    out.div_acc_term += w * div_acc;
    out.normal_grad_term += w * ngrad;
  }
  out.total = out.curvature_term + out.t_tensor_term + out.div_sq_term + out.div_acc_term +
              out.normal_grad_term;
  return out;
}

}  // namespace ivlab
