#include "ivlab/fft.hpp"

namespace ivlab {

namespace {

// Transform along one axis of the row-major (axis 0 slowest) layout.
void axis_fft(const TorusDomain& dom, ArrayXcd& f, int axis, bool inverse) {
  Eigen::FFT<Real> fft;
  const int N = dom.grid[axis];
  std::int64_t stride = 1;
  for (int a = axis + 1; a < dom.n; ++a) stride *= dom.grid[a];
  const std::int64_t lines = dom.sites() / N;
  std::vector<Complex> in(N), out(N);
  for (std::int64_t line = 0; line < lines; ++line) {
    // Base index of this line: split the line counter around the axis.
    const std::int64_t inner = line % stride;
    const std::int64_t outer = line / stride;
    const std::int64_t base = outer * stride * N + inner;
    for (int i = 0; i < N; ++i) in[static_cast<size_t>(i)] = f[base + i * stride];
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    for (int i = 0; i < N; ++i) f[base + i * stride] = out[static_cast<size_t>(i)];
  }
}

}  // namespace

void fft_forward(const TorusDomain& dom, ArrayXcd& f) {
  for (int a = 0; a < dom.n; ++a) axis_fft(dom, f, a, false);
}

void fft_inverse(const TorusDomain& dom, ArrayXcd& f) {
  for (int a = 0; a < dom.n; ++a) axis_fft(dom, f, a, true);
}

Real laplace_symbol(const TorusDomain& dom, const std::array<int, 3>& k) {
  Real s = 0;
  for (int a = 0; a < dom.n; ++a) {
    const Real h = dom.spacing(a);
    s += (2.0 - 2.0 * std::cos(2.0 * kPi * k[a] / dom.grid[a])) / (h * h);
  }
  return s;
}

ArrayXcd helmholtz_inverse(const TorusDomain& dom, const ArrayXcd& r, Real sigma) {
  ArrayXcd f = r;
  fft_forward(dom, f);
  const std::int64_t S = dom.sites();
  for (std::int64_t idx = 0; idx < S; ++idx) {
    const auto c = dom.coords(idx);
    const Real s = laplace_symbol(dom, c) + sigma;
    if (s <= 0) {
      f[idx] = Complex(0, 0);  // zero mode with sigma == 0
    } else {
      f[idx] /= s;
    }
  }
  fft_inverse(dom, f);
  return f;
}

ArrayXd helmholtz_inverse(const TorusDomain& dom, const ArrayXd& r, Real sigma) {
  ArrayXcd tmp = r.cast<Complex>();
  tmp = helmholtz_inverse(dom, tmp, sigma);
  return tmp.real();
}

}  // namespace ivlab
