#include "ivlab/vector_field.hpp"

namespace ivlab {

VecJet VectorFieldSpec::jet(const Point& x) const {
  VecJet out;
  for (const Term& t : terms_) {
    std::array<Real, 3> w{0, 0, 0};
    for (int a = 0; a < n_; ++a) w[a] = 2.0 * kPi * t.mode[a] / periods_[a];
    Real arg = t.phase;
    for (int a = 0; a < n_; ++a) arg += w[a] * x[a];
    const Real c = std::cos(arg), s = std::sin(arg);
    out.X[t.component] += t.amplitude * c;
    for (int k = 0; k < n_; ++k) {
      out.dX(k, t.component) += -t.amplitude * w[k] * s;
      for (int m = 0; m < n_; ++m) out.ddX[m](k, t.component) += -t.amplitude * w[m] * w[k] * c;
    }
  }
  return out;
}

VectorFieldSpec VectorFieldSpec::constant(int n, std::array<Real, 3> periods, const Point& c) {
  std::vector<Term> terms;
  for (int l = 0; l < n; ++l)
    if (c[l] != 0.0) terms.push_back(Term{l, c[l], {0, 0, 0}, 0.0});
  return VectorFieldSpec(n, periods, std::move(terms));
}

VectorFieldSpec VectorFieldSpec::random_fourier(int n, std::array<Real, 3> periods, Rng& rng,
                                                int max_mode, Real amplitude) {
  std::vector<Term> terms;
  for (int l = 0; l < n; ++l) {
    terms.push_back(Term{l, amplitude * rng.uniform(-0.3, 0.3), {0, 0, 0}, 0.0});
    for (int m0 = -max_mode; m0 <= max_mode; ++m0)
      for (int m1 = -max_mode; m1 <= max_mode; ++m1)
        for (int m2 = (n == 3 ? -max_mode : 0); m2 <= (n == 3 ? max_mode : 0); ++m2) {
          if (m0 == 0 && m1 == 0 && m2 == 0) continue;
          const int mag2 = m0 * m0 + m1 * m1 + m2 * m2;
          if (mag2 > max_mode * max_mode) continue;
          const Real decay = 1.0 / (1.0 + 2.0 * mag2);
          terms.push_back(Term{l, amplitude * decay * rng.uniform(-1.0, 1.0),
                               {m0, m1, m2}, rng.uniform(0.0, 2.0 * kPi)});
        }
  }
  return VectorFieldSpec(n, periods, std::move(terms));
}

VectorFieldSpec VectorFieldSpec::normal_shear(int n, std::array<Real, 3> periods,
                                              const Point& center, Real amplitude) {
  std::vector<Term> terms;
  // sin(2 pi (x0-c0)/L0) = cos(2 pi x0/L0 - 2 pi c0/L0 - pi/2)
  terms.push_back(Term{0, amplitude, {1, 0, 0}, -2.0 * kPi * center[0] / periods[0] - 0.5 * kPi});
  if (n == 3) {
    // Modulate along the tangent axis so the shear varies over the circle.
    terms.push_back(
        Term{0, 0.5 * amplitude, {1, 0, 1}, -2.0 * kPi * center[0] / periods[0] - 0.5 * kPi});
  }
  return VectorFieldSpec(n, periods, std::move(terms));
}

}  // namespace ivlab
