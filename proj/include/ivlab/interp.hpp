#pragma once

#include "ivlab/core.hpp"

namespace ivlab {

/// Catmull-Rom weights for offset s in [0,1); exact at s = 0.
inline std::array<Real, 4> catmull_rom(Real s) {
  const Real s2 = s * s, s3 = s2 * s;
  return {0.5 * (-s + 2 * s2 - s3), 0.5 * (2 - 5 * s2 + 3 * s3), 0.5 * (s + 4 * s2 - 3 * s3),
          0.5 * (-s2 + s3)};
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Separable periodic cubic interpolation. `fetch` is called with unwrapped
/// integer indices and owns the wrap rule (plain periodic, twisted, ...).
template <class T, class Fetch>
T sample_cubic(const TorusDomain& dom, const Point& x, Fetch&& fetch) {
  std::array<std::int64_t, 3> base{0, 0, 0};
  std::array<std::array<Real, 4>, 3> w{};
  for (int a = 0; a < dom.n; ++a) {
    const Real u = x[a] / dom.spacing(a);
    const Real fl = std::floor(u);
    base[a] = static_cast<std::int64_t>(fl);
    w[a] = catmull_rom(u - fl);
  }
  T acc{};
  if (dom.n == 2) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const Real ww = w[0][i] * w[1][j];
        if (ww == 0.0) continue;
        acc += ww * fetch(base[0] + i - 1, base[1] + j - 1, std::int64_t(0));
      }
  } else {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const Real ww = w[0][i] * w[1][j] * w[2][k];
          if (ww == 0.0) continue;
          acc += ww * fetch(base[0] + i - 1, base[1] + j - 1, base[2] + k - 1);
        }
  }
  return acc;
}

/// One term of a finite Fourier representation; fields carrying these can be
/// resampled exactly at arbitrary points.
struct TrigTerm {
  std::array<int, 3> mode{0, 0, 0};
  Complex coeff{0, 0};
};

inline Complex eval_trig(const std::vector<TrigTerm>& terms, const std::array<Real, 3>& periods,
                         int n, const Point& x) {
  Complex acc(0, 0);
  for (const auto& t : terms) {
    Real arg = 0;
    for (int a = 0; a < n; ++a) arg += 2.0 * kPi * t.mode[a] * x[a] / periods[a];
    acc += t.coeff * Complex(std::cos(arg), std::sin(arg));
  }
  return acc;
}

}  // namespace ivlab
