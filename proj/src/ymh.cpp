#include "ivlab/ymh.hpp"

namespace ivlab {

Complex fetch_section(const GaugePair& p, const ArrayXcd& f, std::int64_t i0, std::int64_t i1,
                      std::int64_t i2) {
  // Same twist rule as u; used for section-valued link fields.
  const TorusDomain& dom = p.dom;
  const std::int64_t N0 = dom.grid[0], N1 = dom.grid[1];
  const std::int64_t w0 = floor_div(i0, N0);
  const int a0 = static_cast<int>(i0 - w0 * N0);
  std::int64_t j = i1 % N1;
  if (j < 0) j += N1;
  int a2 = 0;
  if (dom.n == 3) {
    std::int64_t k = i2 % dom.grid[2];
    if (k < 0) k += dom.grid[2];
    a2 = static_cast<int>(k);
  }
  Complex val = f[dom.index(a0, static_cast<int>(j), a2)];
  if (p.degree != 0 && w0 != 0) {
    const Real phase = 2.0 * kPi * p.degree * static_cast<Real>(j) / N1 * static_cast<Real>(w0);
    val *= Complex(std::cos(phase), std::sin(phase));
  }
  return val;
}

namespace {
inline Complex transport_phase(Real a_link, Real h) {
  return Complex(std::cos(h * a_link), -std::sin(h * a_link));
}
}  // namespace

std::array<ArrayXcd, 3> covariant_diff(const GaugePair& p) {
  const TorusDomain& dom = p.dom;
  std::array<ArrayXcd, 3> D;
  for (int j = 0; j < dom.n; ++j) {
    D[j] = ArrayXcd::Zero(dom.sites());
    const Real h = dom.spacing(j);
    parallel_for(dom.sites(), [&, j, h](std::int64_t idx) {
      const auto c = dom.coords(idx);
      const Complex up = fetch_u(p, c[0] + (j == 0), c[1] + (j == 1), c[2] + (j == 2));
      D[j][idx] = (transport_phase(p.a[j][idx], h) * up - p.u[idx]) / h;
    });
  }
  return D;
}

Curvature curvature_of(const GaugePair& p) {
  const TorusDomain& dom = p.dom;
  Curvature f;
  for (int j = 0; j < dom.n; ++j)
    for (int k = j + 1; k < dom.n; ++k) {
      const int pl = Curvature::plane(j, k);
      f.w[pl] = ArrayXd::Zero(dom.sites());
      const Real hj = dom.spacing(j), hk = dom.spacing(k);
      parallel_for(dom.sites(), [&, j, k, pl, hj, hk](std::int64_t idx) {
        const auto c = dom.coords(idx);
        const Real ak_pj = fetch_a(p, k, c[0] + (j == 0), c[1] + (j == 1), c[2] + (j == 2));
        const Real aj_pk = fetch_a(p, j, c[0] + (k == 0), c[1] + (k == 1), c[2] + (k == 2));
        f.w[pl][idx] = (ak_pj - p.a[k][idx]) / hj - (aj_pk - p.a[j][idx]) / hk;
      });
    }
  return f;
}

EnergyReport ymh_energy(const GaugePair& p) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const Real eps2 = p.epsilon * p.epsilon;
  const Real ieps2 = 1.0 / eps2;
  const auto D = covariant_diff(p);
  const Curvature f = curvature_of(p);

  EnergyReport rep;
  rep.density = ArrayXd::Zero(dom.sites());
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Real dir = 0;
    for (int j = 0; j < dom.n; ++j) {
      const std::int64_t back = dom.shifted_index(c, j, -1);
      dir += 0.5 * (std::norm(D[j][idx]) + std::norm(D[j][back]));
    }
    Real curv = 0;
    for (int j = 0; j < dom.n; ++j)
      for (int k = j + 1; k < dom.n; ++k) {
        const int pl = Curvature::plane(j, k);
        // mean of the squared curvature over the 4 plaquettes at the site
        Real s = 0;
        for (int dj = 0; dj >= -1; --dj)
          for (int dk = 0; dk >= -1; --dk) {
            auto cc = c;
            cc[j] = dom.wrap(c[j] + dj, j);
            cc[k] = dom.wrap(c[k] + dk, k);
            const Real w = f.w[pl][dom.index(cc[0], cc[1], cc[2])];
            s += w * w;
          }
        curv += 0.25 * s;
      }
    rep.density[idx] = dir + eps2 * curv + double_well(p.u[idx]) * ieps2;
  });
  rep.total = block_sum(dom.sites(), [&](std::int64_t i) { return rep.density[i]; }) *
              dom.cell_volume();
  return rep;
}

Real ymh_energy_total(const GaugePair& p) {
  const TorusDomain& dom = p.dom;
  const Real eps2 = p.epsilon * p.epsilon;
  const auto D = covariant_diff(p);
  const Curvature f = curvature_of(p);
  Real s = block_sum(dom.sites(), [&](std::int64_t idx) {
    Real t = double_well(p.u[idx]) / eps2;
    for (int j = 0; j < dom.n; ++j) t += std::norm(D[j][idx]);
    for (int j = 0; j < dom.n; ++j)
      for (int k = j + 1; k < dom.n; ++k) {
        const Real w = f.w[Curvature::plane(j, k)][idx];
        t += eps2 * w * w;
      }
    return t;
  });
  return s * dom.cell_volume();
}

YmhResiduals ymh_residuals(const GaugePair& p) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const Real eps2 = p.epsilon * p.epsilon;
  const auto D = covariant_diff(p);
  const Curvature f = curvature_of(p);

  YmhResiduals out;
  out.r_u = ArrayXcd::Zero(dom.sites());
  // r_u = eps^2 sum_j D_j^*(D_j u) - (1 - |u|^2) u / 2,
  // D_j^* w (x) = [e^{i h a_j(x - e_j)} w(x - e_j) - w(x)] / h_j.
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Complex lap(0, 0);
    for (int j = 0; j < dom.n; ++j) {
      const Real h = dom.spacing(j);
      const std::int64_t back = dom.shifted_index(c, j, -1);
      const Complex wb = fetch_section(p, D[j], c[0] - (j == 0), c[1] - (j == 1), c[2] - (j == 2));
      const Complex phase = Complex(std::cos(h * p.a[j][back]), std::sin(h * p.a[j][back]));
      lap += (phase * wb - D[j][idx]) / h;
    }
    const Complex u = p.u[idx];
    out.r_u[idx] = eps2 * lap - 0.5 * (1.0 - std::norm(u)) * u;
  });

  for (int k = 0; k < dom.n; ++k) {
    out.r_a[k] = ArrayXd::Zero(dom.sites());
    parallel_for(dom.sites(), [&, k](std::int64_t idx) {
      const auto c = dom.coords(idx);
      Real dstar = 0;
      for (int j = 0; j < dom.n; ++j) {
        if (j == k) continue;
        const int lo = std::min(j, k), hi = std::max(j, k);
        const Real sgn = (j < k) ? 1.0 : -1.0;  // omega_{jk} = sgn * w[plane]
        const int pl = Curvature::plane(lo, hi);
        auto cb = c;
        cb[j] = dom.wrap(c[j] - 1, j);
        const Real wjk_b = sgn * f.w[pl][dom.index(cb[0], cb[1], cb[2])];
        const Real wjk = sgn * f.w[pl][idx];
        dstar += (wjk_b - wjk) / dom.spacing(j);
      }
      const Real current = (std::conj(p.u[idx]) * D[k][idx]).imag();
      out.r_a[k][idx] = eps2 * dstar - current;
    });
  }
  return out;
}

Real YmhResiduals::sup_norm() const {
  Real s = r_u.abs().maxCoeff();
  for (const auto& ra : r_a)
    if (ra.size()) s = std::max(s, ra.abs().maxCoeff());
  return s;
}

EpsPair ymh_gradient(const GaugePair& p) {
  const YmhResiduals r = ymh_residuals(p);
  EpsPair g = EpsPair::zero(p.dom);
  g.phi = r.r_u * (2.0 / (p.epsilon * p.epsilon));
  for (int j = 0; j < p.dom.n; ++j) g.alpha[j] = 2.0 * r.r_a[j];
  return g;
}

GaugePair gauge_transform(const GaugePair& p, const ArrayXd& chi) {
  p.validate();
  const TorusDomain& dom = p.dom;
  if (chi.size() != dom.sites()) throw std::invalid_argument("gauge_transform: size mismatch");
  GaugePair out = p;
  out.u_spectral.clear();
  for (auto& s : out.a_spectral) s.clear();
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    out.u[idx] = p.u[idx] * Complex(std::cos(chi[idx]), std::sin(chi[idx]));
  });
  for (int j = 0; j < dom.n; ++j) {
    parallel_for(dom.sites(), [&, j](std::int64_t idx) {
      const auto c = dom.coords(idx);
      const Real dchi = (chi[dom.shifted_index(c, j, +1)] - chi[idx]) / dom.spacing(j);
      out.a[j][idx] = p.a[j][idx] + dchi;
    });
  }
  return out;
}

EpsPair gauge_direction(const GaugePair& p, const ArrayXd& chi) {
  EpsPair q = EpsPair::zero(p.dom);
  const TorusDomain& dom = p.dom;
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx)
    q.phi[idx] = Complex(0, 1) * chi[idx] * p.u[idx];
  for (int j = 0; j < dom.n; ++j)
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const auto c = dom.coords(idx);
      q.alpha[j][idx] = (chi[dom.shifted_index(c, j, +1)] - chi[idx]) / dom.spacing(j);
    }
  return q;
}

Real eps_inner_product(const EpsPair& a, const EpsPair& b, Real epsilon) {
  if (!a.dom.same_shape(b.dom)) throw std::invalid_argument("eps_inner_product: domain mismatch");
  const TorusDomain& dom = a.dom;
  Real s = block_sum(dom.sites(),
                     [&](std::int64_t i) { return (a.phi[i] * std::conj(b.phi[i])).real(); });
  Real sl = 0;
  for (int j = 0; j < dom.n; ++j)
    sl += block_sum(dom.sites(), [&](std::int64_t i) { return a.alpha[j][i] * b.alpha[j][i]; });
  return (s + epsilon * epsilon * sl) * dom.cell_volume();
}

Real plain_inner_product(const EpsPair& a, const EpsPair& b) {
  if (!a.dom.same_shape(b.dom)) throw std::invalid_argument("plain_inner_product: domain mismatch");
  const TorusDomain& dom = a.dom;
  Real s = block_sum(dom.sites(),
                     [&](std::int64_t i) { return (a.phi[i] * std::conj(b.phi[i])).real(); });
  for (int j = 0; j < dom.n; ++j)
    s += block_sum(dom.sites(), [&](std::int64_t i) { return a.alpha[j][i] * b.alpha[j][i]; });
  return s * dom.cell_volume();
}

StressField ymh_stress(const GaugePair& p) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const Real eps2 = p.epsilon * p.epsilon;
  const auto D = covariant_diff(p);
  const Curvature f = curvature_of(p);
  const EnergyReport e = ymh_energy(p);

  StressField out;
  out.dom = dom;
  out.S.assign(dom.sites(), Mat3::Zero());
  out.T.assign(dom.sites(), Mat3::Zero());
  out.omega.assign(dom.sites(), Mat3::Zero());
  out.energy_density = e.density;

  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    // Symmetrised covariant derivative: mean of the forward difference and
    // the transported backward one; gauge-covariant, second order.
    std::array<Complex, 3> Dbar{};
    for (int j = 0; j < dom.n; ++j) {
      const Real h = dom.spacing(j);
      const std::int64_t back = dom.shifted_index(c, j, -1);
      const Complex wb = fetch_section(p, D[j], c[0] - (j == 0), c[1] - (j == 1), c[2] - (j == 2));
      const Complex phase = Complex(std::cos(h * p.a[j][back]), std::sin(h * p.a[j][back]));
      Dbar[j] = 0.5 * (D[j][idx] + phase * wb);
    }
    // Site-averaged curvature per plane (mean of the 4 touching plaquettes).
    Mat3 w = Mat3::Zero();
    for (int j = 0; j < dom.n; ++j)
      for (int k = j + 1; k < dom.n; ++k) {
        const int pl = Curvature::plane(j, k);
        Real s = 0;
        for (int dj = 0; dj >= -1; --dj)
          for (int dk = 0; dk >= -1; --dk) {
            auto cc = c;
            cc[j] = dom.wrap(c[j] + dj, j);
            cc[k] = dom.wrap(c[k] + dk, k);
            s += f.w[pl][dom.index(cc[0], cc[1], cc[2])];
          }
        w(j, k) = 0.25 * s;
        w(k, j) = -w(j, k);
      }
    out.omega[idx] = w;
    Mat3 S = Mat3::Zero();
    for (int j = 0; j < dom.n; ++j)
      for (int k = 0; k < dom.n; ++k) {
        Real grad_part = (std::conj(Dbar[j]) * Dbar[k]).real();
        Real curv_part = 0;
        for (int l = 0; l < dom.n; ++l) curv_part += w(j, l) * w(k, l);
        S(j, k) = 2.0 * (grad_part + eps2 * curv_part);
      }
    out.S[idx] = S;
    Mat3 T = Mat3::Zero();
    T.topLeftCorner(dom.n, dom.n) =
        e.density[idx] * MatrixXd::Identity(dom.n, dom.n) - S.topLeftCorner(dom.n, dom.n);
    out.T[idx] = T;
  });
  return out;
}

EnergyReport ymh_energy_measure(const GaugePair& p) {
  EnergyReport rep = ymh_energy(p);
  rep.total /= 2.0 * kPi;
  rep.density /= 2.0 * kPi;
  return rep;
}

EpsPair ymh_hessian_apply(const GaugePair& p, const EpsPair& q) {
  p.validate();
  if (!p.dom.same_shape(q.dom)) throw std::invalid_argument("ymh_hessian_apply: domain mismatch");
  const TorusDomain& dom = p.dom;
  const Real ieps2 = 1.0 / (p.epsilon * p.epsilon);
  const Real eps2 = p.epsilon * p.epsilon;
  const auto D = covariant_diff(p);

  // Transported neighbours and linearised covariant derivatives per link:
  // T_j u = e^{-i h a_j} u(x+e_j),  G_j = D_j phi - i alpha_j T_j u.
  std::array<ArrayXcd, 3> Tu, Tphi, G;
  for (int j = 0; j < dom.n; ++j) {
    const Real h = dom.spacing(j);
    Tu[j] = ArrayXcd::Zero(dom.sites());
    Tphi[j] = ArrayXcd::Zero(dom.sites());
    G[j] = ArrayXcd::Zero(dom.sites());
    parallel_for(dom.sites(), [&, j, h](std::int64_t idx) {
      const auto c = dom.coords(idx);
      const Complex ph = transport_phase(p.a[j][idx], h);
      const Complex up = fetch_u(p, c[0] + (j == 0), c[1] + (j == 1), c[2] + (j == 2));
      const Complex php = fetch_section(p, q.phi, c[0] + (j == 0), c[1] + (j == 1), c[2] + (j == 2));
      Tu[j][idx] = ph * up;
      Tphi[j][idx] = ph * php;
      const Complex Dphi = (Tphi[j][idx] - q.phi[idx]) / h;
      G[j][idx] = Dphi - Complex(0, 1) * q.alpha[j][idx] * Tu[j][idx];
    });
  }

  EpsPair out = EpsPair::zero(dom);

  // Section part:
  //   H_u = 2 sum_j D_j^* G_j + 2 sum_j T_j^a(alpha_j i D_j u)
  //         + [2 Re(conj(u) phi) u + (|u|^2 - 1) phi] / eps^2
  // with T_j^a w (x) = e^{i h a_j(x-e_j)} w(x-e_j).
  std::array<ArrayXcd, 3> W;  // alpha_j * i * D_j u per link
  for (int j = 0; j < dom.n; ++j) {
    W[j] = ArrayXcd::Zero(dom.sites());
    parallel_for(dom.sites(), [&, j](std::int64_t idx) {
      W[j][idx] = Complex(0, 1) * q.alpha[j][idx] * D[j][idx];
    });
  }
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Complex acc(0, 0);
    for (int j = 0; j < dom.n; ++j) {
      const Real h = dom.spacing(j);
      const std::int64_t back = dom.shifted_index(c, j, -1);
      const Complex phase_b = Complex(std::cos(h * p.a[j][back]), std::sin(h * p.a[j][back]));
      const Complex Gb = fetch_section(p, G[j], c[0] - (j == 0), c[1] - (j == 1), c[2] - (j == 2));
      acc += 2.0 * (phase_b * Gb - G[j][idx]) / h;
      const Complex w_b = fetch_section(p, W[j], c[0] - (j == 0), c[1] - (j == 1), c[2] - (j == 2));
      acc += 2.0 * phase_b * w_b;
    }
    const Complex u = p.u[idx];
    acc += (2.0 * (std::conj(u) * q.phi[idx]).real() * u + (std::norm(u) - 1.0) * q.phi[idx]) *
           ieps2;
    out.phi[idx] = acc;
  });

  // Curvature part: 2 eps^2 (d* d alpha)_k, plus the link-local pieces.
  Curvature dalpha;
  for (int j = 0; j < dom.n; ++j)
    for (int k = j + 1; k < dom.n; ++k) {
      const int pl = Curvature::plane(j, k);
      dalpha.w[pl] = ArrayXd::Zero(dom.sites());
      parallel_for(dom.sites(), [&, j, k, pl](std::int64_t idx) {
        const auto c = dom.coords(idx);
        const Real ak_pj = q.alpha[k][dom.shifted_index(c, j, +1)];
        const Real aj_pk = q.alpha[j][dom.shifted_index(c, k, +1)];
        dalpha.w[pl][idx] = (ak_pj - q.alpha[k][idx]) / dom.spacing(j) -
                            (aj_pk - q.alpha[j][idx]) / dom.spacing(k);
      });
    }
  for (int k = 0; k < dom.n; ++k) {
    parallel_for(dom.sites(), [&, k](std::int64_t idx) {
      const auto c = dom.coords(idx);
      Real dstar = 0;
      for (int j = 0; j < dom.n; ++j) {
        if (j == k) continue;
        const int lo = std::min(j, k), hi = std::max(j, k);
        const Real sgn = (j < k) ? 1.0 : -1.0;
        const int pl = Curvature::plane(lo, hi);
        auto cb = c;
        cb[j] = dom.wrap(c[j] - 1, j);
        dstar += (sgn * dalpha.w[pl][dom.index(cb[0], cb[1], cb[2])] -
                  sgn * dalpha.w[pl][idx]) /
                 dom.spacing(j);
      }
      const Real h = dom.spacing(k);
      const Real loc = 2.0 * (std::conj(G[k][idx]) * Tu[k][idx]).imag() -
                       2.0 * h * q.alpha[k][idx] * (std::conj(D[k][idx]) * Tu[k][idx]).real() +
                       2.0 * (std::conj(D[k][idx]) * Tphi[k][idx]).imag();
      out.alpha[k][idx] = 2.0 * eps2 * dstar + loc;
    });
  }
  return out;
}

int bundle_degree(const GaugePair& p) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const Curvature f = curvature_of(p);
  // Flux through the k2 = 0 slice of the (0,1) plaquettes.
  Real flux = 0;
  for (int i = 0; i < dom.grid[0]; ++i)
    for (int j = 0; j < dom.grid[1]; ++j)
      flux += f.w[0][dom.index(i, j, 0)] * dom.spacing(0) * dom.spacing(1);
  const Real d = flux / (2.0 * kPi);
  const Real rounded = std::round(d);
  if (std::abs(d - rounded) > 1e-6)
    throw std::runtime_error("bundle_degree: non-integer flux, twist data corrupted");
  return static_cast<int>(rounded);
}

}  // namespace ivlab
