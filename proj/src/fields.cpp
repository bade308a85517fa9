#include "ivlab/fields.hpp"

#include "ivlab/flow.hpp"

namespace ivlab {

Complex fetch_u(const GaugePair& p, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
  const TorusDomain& dom = p.dom;
  const std::int64_t N0 = dom.grid[0], N1 = dom.grid[1];
  const std::int64_t w0 = floor_div(i0, N0);
  const int a0 = static_cast<int>(i0 - w0 * N0);
  std::int64_t j = i1 % N1;
  if (j < 0) j += N1;
  int a2 = 0;
  if (dom.n == 3) {
    const std::int64_t N2 = dom.grid[2];
    std::int64_t k = i2 % N2;
    if (k < 0) k += N2;
    a2 = static_cast<int>(k);
  }
  Complex val = p.u[dom.index(a0, static_cast<int>(j), a2)];
  if (p.degree != 0 && w0 != 0) {
    const Real phase = 2.0 * kPi * p.degree * static_cast<Real>(j) / N1 * static_cast<Real>(w0);
    val *= Complex(std::cos(phase), std::sin(phase));
  }
  return val;
}

Real fetch_a(const GaugePair& p, int axis, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
  const TorusDomain& dom = p.dom;
  const std::int64_t N0 = dom.grid[0];
  const std::int64_t w0 = floor_div(i0, N0);
  Real val = fetch_periodic(dom, p.a[axis], i0, i1, i2);
  if (axis == 1 && p.degree != 0 && w0 != 0) val += static_cast<Real>(w0) * p.twist_jump();
  return val;
}

ArrayXd background_a1(const TorusDomain& dom, int degree) {
  ArrayXd a1 = ArrayXd::Zero(dom.sites());
  if (degree == 0) return a1;
  const Real wbar = 2.0 * kPi * degree / (dom.periods[0] * dom.periods[1]);
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const auto c = dom.coords(idx);
    a1[idx] = wbar * c[0] * dom.spacing(0);
  }
  return a1;
}

ScalarField random_scalar_state(const TorusDomain& dom, Real epsilon, Rng& rng, int max_mode,
                                Real amplitude, Complex background) {
  ScalarField f;
  f.dom = dom;
  f.epsilon = epsilon;
  f.spectral.push_back(TrigTerm{{0, 0, 0}, background});
  for (int m0 = -max_mode; m0 <= max_mode; ++m0)
    for (int m1 = -max_mode; m1 <= max_mode; ++m1)
      for (int m2 = (dom.n == 3 ? -max_mode : 0); m2 <= (dom.n == 3 ? max_mode : 0); ++m2) {
        if (m0 == 0 && m1 == 0 && m2 == 0) continue;
        const int mag2 = m0 * m0 + m1 * m1 + m2 * m2;
        if (mag2 > max_mode * max_mode) continue;
        const Real decay = 1.0 / (1.0 + 3.0 * mag2);
        const Complex c(amplitude * decay * rng.uniform(-1.0, 1.0),
                        amplitude * decay * rng.uniform(-1.0, 1.0));
        f.spectral.push_back(TrigTerm{{m0, m1, m2}, c});
      }
  f.values = ArrayXcd::Zero(dom.sites());
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const auto c = dom.coords(idx);
    f.values[idx] = eval_trig(f.spectral, dom.periods, dom.n, dom.site_point(c));
  }
  f.validate();
  return f;
}

GaugePair random_gauge_state(const TorusDomain& dom, Real epsilon, Rng& rng, int max_mode,
                             Real amplitude, Real link_amplitude) {
  GaugePair p;
  p.dom = dom;
  p.epsilon = epsilon;
  p.degree = 0;
  ScalarField tmp = random_scalar_state(dom, epsilon, rng, max_mode, amplitude);
  p.u = tmp.values;
  p.u_spectral = tmp.spectral;
  for (int j = 0; j < dom.n; ++j) {
    auto& terms = p.a_spectral[j];
    terms.push_back(TrigTerm{{0, 0, 0}, Complex(link_amplitude * rng.uniform(-0.3, 0.3), 0)});
    for (int m0 = -max_mode; m0 <= max_mode; ++m0)
      for (int m1 = -max_mode; m1 <= max_mode; ++m1)
        for (int m2 = (dom.n == 3 ? -max_mode : 0); m2 <= (dom.n == 3 ? max_mode : 0); ++m2) {
          if (m0 == 0 && m1 == 0 && m2 == 0) continue;
          const int mag2 = m0 * m0 + m1 * m1 + m2 * m2;
          if (mag2 > max_mode * max_mode) continue;
          const Real decay = 1.0 / (1.0 + 3.0 * mag2);
          terms.push_back(TrigTerm{{m0, m1, m2},
                                   Complex(link_amplitude * decay * rng.uniform(-1.0, 1.0),
                                           link_amplitude * decay * rng.uniform(-1.0, 1.0))});
        }
    p.a[j] = ArrayXd::Zero(dom.sites());
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const auto c = dom.coords(idx);
      Point mid = dom.site_point(c);
      mid[j] += 0.5 * dom.spacing(j);  // link values live at edge midpoints
      p.a[j][idx] = eval_trig(terms, dom.periods, dom.n, mid).real();
    }
  }
  p.validate();
  return p;
}

namespace {

bool use_spectral(ResampleMethod m, bool has_spectral) {
  if (m == ResampleMethod::spectral) {
    if (!has_spectral) throw std::invalid_argument("spectral resampling requested for a field without a band-limited representation");
    return true;
  }
  return m == ResampleMethod::automatic && has_spectral;
}

}  // namespace

ScalarField resample_pullback(const ScalarField& f, const VectorFieldSpec& X, Real t,
                              ResampleMethod method) {
  f.validate();
  ScalarField out;
  out.dom = f.dom;
  out.epsilon = f.epsilon;
  out.values = ArrayXcd::Zero(f.dom.sites());
  const bool spectral = use_spectral(method, !f.spectral.empty());
  const TorusDomain& dom = f.dom;
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    const Point x = dom.site_point(c);
    Point y;
    Mat3 J;
    flow_map_jet(dom, X, -t, x, y, J);
    if (spectral) {
      out.values[idx] = eval_trig(f.spectral, dom.periods, dom.n, y);
    } else {
      out.values[idx] = sample_cubic<Complex>(dom, y, [&](std::int64_t i0, std::int64_t i1,
                                                          std::int64_t i2) {
        return fetch_periodic(dom, f.values, i0, i1, i2);
      });
    }
  });
  return out;
}

GaugePair pullback_pair(const GaugePair& p, const VectorFieldSpec& X, Real t,
                        ResampleMethod method) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const int n = dom.n;
  const bool spectral =
      use_spectral(method, p.degree == 0 && !p.u_spectral.empty());

  GaugePair out;
  out.dom = dom;
  out.epsilon = p.epsilon;
  out.degree = p.degree;
  out.u = ArrayXcd::Zero(dom.sites());
  for (int j = 0; j < n; ++j) out.a[j] = ArrayXd::Zero(dom.sites());

  const Real wbar = 2.0 * kPi * p.degree / (dom.periods[0] * dom.periods[1]);
  const Real twist_rate = 2.0 * kPi * p.degree / dom.periods[1];
  const ArrayXd abg1 = background_a1(dom, p.degree);

  // Periodic part of the potential, interpolated at link midpoints.
  std::array<const ArrayXd*, 3> alpha{};
  ArrayXd alpha1;
  if (p.degree != 0) alpha1 = p.a[1] - abg1;
  for (int j = 0; j < n; ++j) alpha[j] = (j == 1 && p.degree != 0) ? &alpha1 : &p.a[j];

  auto eval_alpha = [&](int k, const Point& y) -> Real {
    if (spectral) return eval_trig(p.a_spectral[k], dom.periods, dom.n, y).real();
    Point shifted = y;
    shifted[k] -= 0.5 * dom.spacing(k);
    return sample_cubic<Real>(dom, shifted,
                              [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
                                return fetch_periodic(dom, *alpha[k], i0, i1, i2);
                              });
  };

  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    const Point x = dom.site_point(c);

    // Section: u^t(x) = e^{i chi(x)} u(Phi^{-t} x); chi repairs the twist.
    {
      Point y;
      Mat3 J;
      flow_map_jet(dom, X, -t, x, y, J);
      Complex val;
      if (spectral) {
        val = eval_trig(p.u_spectral, dom.periods, dom.n, y);
      } else {
        val = sample_cubic<Complex>(
            dom, y, [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
              return fetch_u(p, i0, i1, i2);
            });
      }
      if (p.degree != 0) {
        const Real chi = -twist_rate * (x[0] / dom.periods[0]) * (y[1] - x[1]);
        val *= Complex(std::cos(chi), std::sin(chi));
      }
      out.u[idx] = val;
    }

    // Potential: cotangent pullback sampled at link midpoints, then the
    // differential of the repair gauge added so the standard twist holds.
    for (int j = 0; j < n; ++j) {
      Point xm = x;
      xm[j] += 0.5 * dom.spacing(j);
      Point y;
      Mat3 J;
      flow_map_jet(dom, X, -t, xm, y, J);
      Real val = 0;
      for (int k = 0; k < n; ++k) {
        Real Ak = eval_alpha(k, y);
        if (k == 1 && p.degree != 0) Ak += wbar * y[0];
        val += Ak * J(k, j);
      }
      if (p.degree != 0) {
        const Real d1 = y[1] - xm[1];
        const Real dd1_j = J(1, j) - (j == 1 ? 1.0 : 0.0);
        val += -twist_rate * ((j == 0 ? d1 / dom.periods[0] : 0.0) +
                              (xm[0] / dom.periods[0]) * dd1_j);
      }
      out.a[j][idx] = val;
    }
  });
  return out;
}

ScalarField regrid(const ScalarField& f, const TorusDomain& target) {
  ScalarField out;
  out.dom = target;
  out.epsilon = f.epsilon;
  out.values = ArrayXcd::Zero(target.sites());
  for (std::int64_t idx = 0; idx < target.sites(); ++idx) {
    const Point x = target.site_point(target.coords(idx));
    out.values[idx] = sample_cubic<Complex>(
        f.dom, x, [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
          return fetch_periodic(f.dom, f.values, i0, i1, i2);
        });
  }
  return out;
}

GaugePair regrid(const GaugePair& p, const TorusDomain& target) {
  GaugePair out;
  out.dom = target;
  out.epsilon = p.epsilon;
  out.degree = p.degree;
  out.u = ArrayXcd::Zero(target.sites());
  const ArrayXd abg_src = background_a1(p.dom, p.degree);
  const ArrayXd abg_tgt = background_a1(target, p.degree);
  ArrayXd alpha1;
  if (p.degree != 0) alpha1 = p.a[1] - abg_src;
  std::array<const ArrayXd*, 3> alpha{};
  for (int j = 0; j < p.dom.n; ++j) alpha[j] = (j == 1 && p.degree != 0) ? &alpha1 : &p.a[j];

  for (std::int64_t idx = 0; idx < target.sites(); ++idx) {
    const Point x = target.site_point(target.coords(idx));
    out.u[idx] = sample_cubic<Complex>(p.dom, x,
                                       [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
                                         return fetch_u(p, i0, i1, i2);
                                       });
  }
  for (int j = 0; j < target.n; ++j) {
    out.a[j] = ArrayXd::Zero(target.sites());
    for (std::int64_t idx = 0; idx < target.sites(); ++idx) {
      Point xm = target.site_point(target.coords(idx));
      xm[j] += 0.5 * target.spacing(j);
      Point shifted = xm;
      shifted[j] -= 0.5 * p.dom.spacing(j);
      Real val = sample_cubic<Real>(p.dom, shifted,
                                    [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
                                      return fetch_periodic(p.dom, *alpha[j], i0, i1, i2);
                                    });
      if (j == 1 && p.degree != 0) val += abg_tgt[idx];
      out.a[j][idx] = val;
    }
  }
  return out;
}

VectorXd pack(const ScalarField& f) {
  const std::int64_t N = f.dom.sites();
  VectorXd v(2 * N);
  for (std::int64_t i = 0; i < N; ++i) {
    v[i] = f.values[i].real();
    v[N + i] = f.values[i].imag();
  }
  return v;
}

void unpack(const VectorXd& v, ScalarField& f) {
  const std::int64_t N = f.dom.sites();
  if (v.size() != 2 * N) throw std::invalid_argument("unpack: size mismatch");
  f.values.resize(N);
  for (std::int64_t i = 0; i < N; ++i) f.values[i] = Complex(v[i], v[N + i]);
}

VectorXd pack(const EpsPair& q) {
  const std::int64_t N = q.dom.sites();
  const int n = q.dom.n;
  VectorXd v((2 + n) * N);
  for (std::int64_t i = 0; i < N; ++i) {
    v[i] = q.phi[i].real();
    v[N + i] = q.phi[i].imag();
  }
  for (int j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < N; ++i) v[(2 + j) * N + i] = q.alpha[j][i];
  return v;
}

void unpack(const VectorXd& v, EpsPair& q) {
  const std::int64_t N = q.dom.sites();
  const int n = q.dom.n;
  if (v.size() != (2 + n) * N) throw std::invalid_argument("unpack: size mismatch");
  q.phi.resize(N);
  for (std::int64_t i = 0; i < N; ++i) q.phi[i] = Complex(v[i], v[N + i]);
  for (int j = 0; j < n; ++j) {
    q.alpha[j].resize(N);
    for (std::int64_t i = 0; i < N; ++i) q.alpha[j][i] = v[(2 + j) * N + i];
  }
}

std::int64_t dof_count(const ScalarField& f) { return 2 * f.dom.sites(); }
std::int64_t dof_count(const TorusDomain& dom, bool gauge_pair) {
  return gauge_pair ? (2 + dom.n) * dom.sites() : 2 * dom.sites();
}

}  // namespace ivlab
