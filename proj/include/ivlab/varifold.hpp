#pragma once

#include "ivlab/flow.hpp"

namespace ivlab {

/// Weighted concentration set: points in T^2 or axis-aligned circles in T^3,
/// with integer multiplicities. Circles are closed geodesics of the flat
/// metric; normal frames are the complementary coordinate axes (parallel).
struct VarifoldComponent {
  enum class Kind { point, circle };
  Kind kind = Kind::point;
  Point center = Point::Zero();  // circle: transverse coordinates (entry `axis` ignored)
  int axis = 2;                  // tangent axis for circles
  int multiplicity = 1;
};

struct Varifold {
  TorusDomain dom;
  std::vector<VarifoldComponent> components;

  void validate() const {
    for (const auto& c : components) {
      if (c.multiplicity < 1) throw std::invalid_argument("Varifold: multiplicity must be >= 1");
      if (c.kind == VarifoldComponent::Kind::point && dom.n != 2)
        throw std::invalid_argument("Varifold: point components require n = 2");
      if (c.kind == VarifoldComponent::Kind::circle && dom.n != 3)
        throw std::invalid_argument("Varifold: circle components require n = 3");
      if (c.kind == VarifoldComponent::Kind::circle && (c.axis < 0 || c.axis >= dom.n))
        throw std::invalid_argument("Varifold: bad circle axis");
    }
  }

  /// Coordinate axes spanning the normal plane of a component.
  static std::array<int, 2> normal_axes(const VarifoldComponent& c, int n) {
    if (c.kind == VarifoldComponent::Kind::point) return {0, 1};
    std::array<int, 2> out{};
    int k = 0;
    for (int a = 0; a < n; ++a)
      if (a != c.axis) out[k++] = a;
    return out;
  }

  /// Distance from x to a component (torus metric).
  Real distance(const VarifoldComponent& c, const Point& x) const {
    if (c.kind == VarifoldComponent::Kind::point) return dom.distance(x, c.center);
    const auto na = normal_axes(c, dom.n);
    Point d = dom.min_image(x, c.center);
    return std::hypot(d[na[0]], d[na[1]]);
  }
  Real distance(const Point& x) const {
    Real best = std::numeric_limits<Real>::infinity();
    for (const auto& c : components) best = std::min(best, distance(c, x));
    return best;
  }

  /// Sample points along a component (one point for points).
  std::vector<Point> samples(const VarifoldComponent& c, int count) const {
    if (c.kind == VarifoldComponent::Kind::point) return {c.center};
    std::vector<Point> pts;
    pts.reserve(count);
    const Real L = dom.periods[c.axis];
    for (int i = 0; i < count; ++i) {
      Point p = c.center;
      p[c.axis] = L * i / count;
      pts.push_back(p);
    }
    return pts;
  }
  Real component_measure(const VarifoldComponent& c) const {
    return c.kind == VarifoldComponent::Kind::point ? 1.0 : dom.periods[c.axis];
  }
  Real total_mass() const {
    Real m = 0;
    for (const auto& c : components) m += c.multiplicity * component_measure(c);
    return m;
  }
};

/// Term-by-term second variation of area along the flow of X (flat metric).
struct AreaSecondVariation {
  Real total = 0;
  Real curvature_term = 0;   // -tr_{T} R(X,.,X,.)  (zero on flat tori)
  Real t_tensor_term = 0;    // -T_{T}(X,X)
  Real div_sq_term = 0;      // div_T(X)^2
  Real div_acc_term = 0;     // div_T(grad_X X)
  Real normal_grad_term = 0; // |grad^N_T X|^2
};

AreaSecondVariation second_variation_area(const Varifold& gamma, const VectorFieldSpec& X,
                                          int samples = 256);

}  // namespace ivlab
