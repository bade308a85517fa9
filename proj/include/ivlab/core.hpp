#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ivlab {

using Real = double;
using Complex = std::complex<Real>;
using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;

constexpr Real kPi = 3.14159265358979323846;

template <class Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, Real tol = 1e-12) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

/// Point on the torus (or a displacement); only the first n entries are used.
using Point = Eigen::Vector3d;

/// Flat rectangular torus discretised by an even grid, n in {2,3}.
struct TorusDomain {
  int n = 2;
  std::array<Real, 3> periods{1.0, 1.0, 1.0};
  std::array<int, 3> grid{64, 64, 1};

  TorusDomain() = default;
  TorusDomain(int dim, std::array<Real, 3> per, std::array<int, 3> g) : n(dim), periods(per), grid(g) {
    validate();
  }
  static TorusDomain square(int N, Real L = 1.0) { return TorusDomain(2, {L, L, 1.0}, {N, N, 1}); }
  static TorusDomain box(int N0, int N1, int N2, Real L0, Real L1, Real L2) {
    return TorusDomain(3, {L0, L1, L2}, {N0, N1, N2});
  }

  void validate() const {
    if (n != 2 && n != 3) throw std::invalid_argument("TorusDomain: dimension must be 2 or 3");
    for (int a = 0; a < n; ++a) {
      if (!(periods[a] > 0)) throw std::invalid_argument("TorusDomain: periods must be positive");
      if (grid[a] < 8 || grid[a] % 2 != 0)
        throw std::invalid_argument("TorusDomain: grid sizes must be even and >= 8");
    }
  }

  Real spacing(int axis) const { return periods[axis] / grid[axis]; }
  Real max_spacing() const {
    Real h = 0;
    for (int a = 0; a < n; ++a) h = std::max(h, spacing(a));
    return h;
  }
  Real cell_volume() const {
    Real v = 1;
    for (int a = 0; a < n; ++a) v *= spacing(a);
    return v;
  }
  Real volume() const {
    Real v = 1;
    for (int a = 0; a < n; ++a) v *= periods[a];
    return v;
  }
  std::int64_t sites() const {
    std::int64_t s = 1;
    for (int a = 0; a < n; ++a) s *= grid[a];
    return s;
  }

  // Row-major site index with axis 0 slowest.
  std::int64_t index(int i0, int i1, int i2 = 0) const {
    if (n == 2) return static_cast<std::int64_t>(i0) * grid[1] + i1;
    return (static_cast<std::int64_t>(i0) * grid[1] + i1) * grid[2] + i2;
  }
  std::array<int, 3> coords(std::int64_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    if (n == 2) {
      c[1] = static_cast<int>(idx % grid[1]);
      c[0] = static_cast<int>(idx / grid[1]);
    } else {
      c[2] = static_cast<int>(idx % grid[2]);
      idx /= grid[2];
      c[1] = static_cast<int>(idx % grid[1]);
      c[0] = static_cast<int>(idx / grid[1]);
    }
    return c;
  }
  int wrap(int i, int axis) const {
    const int N = grid[axis];
    i %= N;
    return i < 0 ? i + N : i;
  }
  std::int64_t shifted_index(const std::array<int, 3>& c, int axis, int step) const {
    std::array<int, 3> d = c;
    d[axis] = wrap(d[axis] + step, axis);
    return index(d[0], d[1], d[2]);
  }
  Point site_point(const std::array<int, 3>& c) const {
    Point p = Point::Zero();
    for (int a = 0; a < n; ++a) p[a] = c[a] * spacing(a);
    return p;
  }
  Point wrap_point(const Point& x) const {
    Point y = x;
    for (int a = 0; a < n; ++a) {
      y[a] = std::fmod(y[a], periods[a]);
      if (y[a] < 0) y[a] += periods[a];
    }
    return y;
  }
  // Displacement x - y wrapped into [-L/2, L/2) per axis.
  Point min_image(const Point& x, const Point& y) const {
    Point d = Point::Zero();
    for (int a = 0; a < n; ++a) {
      Real t = std::fmod(x[a] - y[a], periods[a]);
      if (t < -0.5 * periods[a]) t += periods[a];
      if (t >= 0.5 * periods[a]) t -= periods[a];
      d[a] = t;
    }
    return d;
  }
  Real distance(const Point& x, const Point& y) const { return min_image(x, y).head(3).norm(); }

  bool same_shape(const TorusDomain& o) const {
    return n == o.n && periods == o.periods && grid == o.grid;
  }
};

// ---------------------------------------------------------------------------
// Deterministic reductions and a small parallel map.
//
// Sums are accumulated over fixed-size blocks and combined in index order, so
// results do not depend on the number of worker threads.

namespace detail {
inline int& thread_cap() {
  static int cap = 1;
  return cap;
}
}  // namespace detail

inline void set_thread_cap(int t) { detail::thread_cap() = std::max(1, t); }
inline int thread_cap() { return detail::thread_cap(); }

template <class F>
void parallel_for(std::int64_t count, F&& body) {
  const int T = std::min<std::int64_t>(thread_cap(), std::max<std::int64_t>(1, count / 4096));
  if (T <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(T);
  const std::int64_t chunk = (count + T - 1) / T;
  for (int t = 0; t < T; ++t) {
    const std::int64_t lo = t * chunk, hi = std::min<std::int64_t>(count, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

template <class F>
Real block_sum(std::int64_t count, F&& term) {
  constexpr std::int64_t B = 1024;
  const std::int64_t nb = (count + B - 1) / B;
  std::vector<Real> partial(static_cast<size_t>(nb), 0.0);
  parallel_for(nb, [&](std::int64_t b) {
    Real s = 0;
    const std::int64_t hi = std::min(count, (b + 1) * B);
    for (std::int64_t i = b * B; i < hi; ++i) s += term(i);
    partial[static_cast<size_t>(b)] = s;
  });
  Real total = 0;
  for (Real s : partial) total += s;
  return total;
}

// ---------------------------------------------------------------------------
// Deterministic RNG: mt19937_64 plus hand-rolled uniforms, so streams are
// reproducible independent of the standard library's distribution details.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64; small, fast and stable across platforms.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }
  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }
  Real normal() {
    // Box-Muller on deterministic uniforms.
    Real u1 = std::max(uniform(), 1e-300), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Rng fork(std::uint64_t salt) { return Rng(next_u64() ^ (salt * 0xd1342543de82ef95ull + 1)); }

 private:
  std::uint64_t state_;
};

}  // namespace ivlab
