#include "ivlab/spectrum.hpp"

#include <algorithm>

#include "ivlab/fft.hpp"

namespace ivlab {

namespace {

MatrixXd apply_block(const LinOp& op, const MatrixXd& X) {
  MatrixXd Y(X.rows(), X.cols());
  for (int c = 0; c < X.cols(); ++c) Y.col(c) = op.apply(X.col(c));
  return Y;
}

// Whitened Rayleigh-Ritz: returns eigenvalues and coefficient matrix C with
// S*C M-orthonormal, dropping numerically dependent directions.
bool rayleigh_ritz(const MatrixXd& SAS, const MatrixXd& SMS, std::vector<Real>& theta,
                   MatrixXd& C) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> gs(0.5 * (SMS + SMS.transpose()));
  if (gs.info() != Eigen::Success) return false;
  const VectorXd ev = gs.eigenvalues();
  const Real cutoff = std::max(ev.cwiseAbs().maxCoeff() * 1e-12, 1e-300);
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) keep.push_back(i);
  if (keep.empty()) return false;
  MatrixXd W(SMS.rows(), keep.size());
  for (size_t k = 0; k < keep.size(); ++k)
    W.col(k) = gs.eigenvectors().col(keep[k]) / std::sqrt(ev[keep[k]]);
  MatrixXd T = W.transpose() * SAS * W;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (T + T.transpose()));
  if (es.info() != Eigen::Success) return false;
  theta.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  C = W * es.eigenvectors();
  return true;
}

}  // namespace

EigenResult lobpcg(const LinOp& A, const LinOp& M, const LinOp* precond, const LinOp* projector,
                   const EigenOptions& opts) {
  const std::int64_t n = A.dim;
  const int m = static_cast<int>(
      std::min<std::int64_t>(n, opts.block > 0 ? opts.block : opts.count + 4));
  Rng rng(opts.seed);

  auto project = [&](MatrixXd& X) {
    if (!projector) return;
    for (int c = 0; c < X.cols(); ++c) X.col(c) = projector->apply(X.col(c));
  };

  MatrixXd X(n, m);
  for (std::int64_t i = 0; i < n; ++i)
    for (int c = 0; c < m; ++c) X(i, c) = rng.normal();
  project(X);

  MatrixXd P;  // previous search directions
  EigenResult out;
  std::vector<Real> theta(m, 0.0);

  for (int it = 0; it < opts.max_iters; ++it) {
    out.iterations = it + 1;
    MatrixXd MX = apply_block(M, X);
    {
      // M-orthonormalize X through Rayleigh-Ritz on X alone.
      MatrixXd AX = apply_block(A, X);
      std::vector<Real> th;
      MatrixXd C;
      if (!rayleigh_ritz(X.transpose() * AX, X.transpose() * MX, th, C))
        throw std::runtime_error("lobpcg: Rayleigh-Ritz breakdown");
      const int keep = std::min<int>(m, static_cast<int>(th.size()));
      X = X * C.leftCols(keep);
      AX = AX * C.leftCols(keep);
      MX = MX * C.leftCols(keep);
      theta.assign(th.begin(), th.begin() + keep);

      // Residuals R = AX - MX diag(theta).
      MatrixXd R = AX;
      for (int c = 0; c < keep; ++c) R.col(c) -= theta[c] * MX.col(c);

      out.values.assign(theta.begin(),
                        theta.begin() + std::min<int>(opts.count, keep));
      out.residuals.clear();
      bool done = true;
      for (int c = 0; c < std::min<int>(opts.count, keep); ++c) {
        const Real rn = R.col(c).norm();
        out.residuals.push_back(rn);
        if (rn > opts.tol * std::max(1.0, std::abs(theta[c]))) done = false;
      }
      out.vectors = X.leftCols(std::min<int>(opts.count, keep));
      if (done) {
        out.converged = true;
        return out;
      }

      // Preconditioned residuals.
      MatrixXd W = R;
      if (precond) W = apply_block(*precond, R);
      project(W);

      // Subspace [X, W, P].
      MatrixXd S(n, X.cols() + W.cols() + (P.size() ? P.cols() : 0));
      S.leftCols(X.cols()) = X;
      S.middleCols(X.cols(), W.cols()) = W;
      if (P.size()) S.rightCols(P.cols()) = P;

      MatrixXd AS = apply_block(A, S);
      MatrixXd MS = apply_block(M, S);
      std::vector<Real> th2;
      MatrixXd C2;
      if (!rayleigh_ritz(S.transpose() * AS, S.transpose() * MS, th2, C2))
        throw std::runtime_error("lobpcg: subspace Rayleigh-Ritz breakdown");
      const int keep2 = std::min<int>(m, static_cast<int>(th2.size()));
      MatrixXd Cx = C2.leftCols(keep2);
      MatrixXd Xn = S * Cx;
      // Implicit P: the part of the new X outside the old X block.
      MatrixXd Cp = Cx;
      Cp.topRows(X.cols()).setZero();
      P = S * Cp;
      X = std::move(Xn);
      project(X);
    }
  }
  // Not converged: report the best current values/residuals.
  out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ArrayXd full_mask(const TorusDomain& dom) { return ArrayXd::Ones(dom.sites()); }

void mask_scalar(const TorusDomain& dom, const ArrayXd& mask, VectorXd& v) {
  const std::int64_t N = dom.sites();
  for (std::int64_t i = 0; i < N; ++i) {
    v[i] *= mask[i];
    v[N + i] *= mask[i];
  }
}

void mask_pair(const TorusDomain& dom, const ArrayXd& mask, VectorXd& v) {
  const std::int64_t N = dom.sites();
  for (std::int64_t i = 0; i < N; ++i) {
    v[i] *= mask[i];
    v[N + i] *= mask[i];
  }
  for (int j = 0; j < dom.n; ++j)
    for (std::int64_t i = 0; i < N; ++i) v[(2 + j) * N + i] *= mask[i];
}

// Gauge projector: q -> q - (i chi u, d chi) with chi solving the
// M-normal equations; conjugate gradients with a spectral preconditioner.
struct GaugeProjector {
  const GaugePair* p = nullptr;
  Real w_a = 1.0;  // eps^2 for the weighted pairing, 1 otherwise
  ArrayXd mask;

  ArrayXd solve_chi(const EpsPair& q) const {
    const TorusDomain& dom = p->dom;
    const std::int64_t N = dom.sites();
    ArrayXd rhs(N);
    for (std::int64_t i = 0; i < N; ++i)
      rhs[i] = (std::conj(Complex(0, 1) * p->u[i]) * q.phi[i]).real() * mask[i];
    for (int j = 0; j < dom.n; ++j)
      for (std::int64_t i = 0; i < N; ++i) {
        const auto c = dom.coords(i);
        const std::int64_t back = dom.shifted_index(c, j, -1);
        rhs[i] += w_a * (q.alpha[j][back] * mask[back] - q.alpha[j][i] * mask[i]) /
                  dom.spacing(j) * -1.0;
      }
    // L chi = |u|^2 chi - w_a Lap chi, restricted to the mask.
    auto L = [&](const ArrayXd& chi) {
      ArrayXd out(N);
      for (std::int64_t i = 0; i < N; ++i) {
        const auto c = dom.coords(i);
        Real lap = 0;
        for (int j = 0; j < dom.n; ++j) {
          const Real h2 = dom.spacing(j) * dom.spacing(j);
          lap += (chi[dom.shifted_index(c, j, +1)] - 2.0 * chi[i] +
                  chi[dom.shifted_index(c, j, -1)]) /
                 h2;
        }
        out[i] = (std::norm(p->u[i]) * chi[i] - w_a * lap) * mask[i];
      }
      return out;
    };
    const Real sigma = std::max(1e-8, std::norm(p->u[0]));
    auto precond = [&](const ArrayXd& r) {
      return ArrayXd(helmholtz_inverse(dom, r, sigma / std::max(w_a, 1e-12)) /
                     std::max(w_a, 1e-12));
    };
    // Preconditioned CG.
    ArrayXd chi = ArrayXd::Zero(N);
    ArrayXd r = rhs;
    ArrayXd z = precond(r);
    ArrayXd d = z;
    Real rz = (r * z).sum();
    const Real rhs_norm = std::sqrt((rhs * rhs).sum());
    if (rhs_norm == 0) return chi;
    for (int it = 0; it < 200; ++it) {
      const ArrayXd Ld = L(d);
      const Real dLd = (d * Ld).sum();
      if (dLd <= 0) break;
      const Real alpha = rz / dLd;
      chi += alpha * d;
      r -= alpha * Ld;
      if (std::sqrt((r * r).sum()) <= 1e-12 * rhs_norm) break;
      z = precond(r);
      const Real rz_new = (r * z).sum();
      d = z + (rz_new / rz) * d;
      rz = rz_new;
    }
    return chi * mask;
  }

  VectorXd operator()(const VectorXd& v) const {
    const TorusDomain& dom = p->dom;
    EpsPair q = EpsPair::zero(dom);
    unpack(v, q);
    const ArrayXd chi = solve_chi(q);
    const EpsPair g = gauge_direction(*p, chi);
    q.phi -= g.phi;
    for (int j = 0; j < dom.n; ++j) q.alpha[j] -= g.alpha[j];
    VectorXd out = pack(q);
    mask_pair(dom, mask, out);
    return out;
  }
};

}  // namespace

SpectrumResult lowest_eigenvalues(const SpectrumRequest& req) {
  SpectrumResult res;
  if (std::holds_alternative<ScalarField>(req.state)) {
    const ScalarField& f = std::get<ScalarField>(req.state);
    const TorusDomain dom = f.dom;
    const std::int64_t N = dom.sites();
    ArrayXd mask = req.mask.size() ? req.mask : full_mask(dom);
    if ((mask > 0).count() == 0) throw std::invalid_argument("lowest_eigenvalues: empty mask");
    const Real cv = dom.cell_volume();

    LinOp A{2 * N, [&, mask](const VectorXd& v) {
              VectorXd w = v;
              mask_scalar(dom, mask, w);
              ScalarField tmp = f;
              unpack(w, tmp);
              tmp.values = gl_hessian_apply(f, tmp.values);
              VectorXd out = pack(tmp) * cv;
              mask_scalar(dom, mask, out);
              return out;
            }};
    LinOp M{2 * N, [&, mask](const VectorXd& v) {
              VectorXd w = v * cv;
              mask_scalar(dom, mask, w);
              return w;
            }};
    const Real sigma = 1.0 / (f.epsilon * f.epsilon);
    LinOp prec{2 * N, [&, mask](const VectorXd& v) {
                 ScalarField tmp = f;
                 VectorXd w = v;
                 unpack(w, tmp);
                 tmp.values = helmholtz_inverse(dom, tmp.values, sigma) / cv;
                 VectorXd out = pack(tmp);
                 mask_scalar(dom, mask, out);
                 return out;
               }};
    EigenOptions opts = req.opts;
    opts.count = req.count;
    const EigenResult er = lobpcg(A, M, &prec, nullptr, opts);
    res.values = er.values;
    res.residuals = er.residuals;
    res.converged = er.converged;
    res.iterations = er.iterations;
    res.vectors = er.vectors;
    return res;
  }

  const GaugePair& p = std::get<GaugePair>(req.state);
  const TorusDomain dom = p.dom;
  const std::int64_t N = dom.sites();
  ArrayXd mask = req.mask.size() ? req.mask : full_mask(dom);
  if ((mask > 0).count() == 0) throw std::invalid_argument("lowest_eigenvalues: empty mask");
  const Real cv = dom.cell_volume();
  const Real eps2 = p.epsilon * p.epsilon;
  const Real w_a = req.pairing == MassPairing::eps_weighted ? eps2 : 1.0;

  LinOp A{(2 + dom.n) * N, [&, mask](const VectorXd& v) {
            VectorXd w = v;
            mask_pair(dom, mask, w);
            EpsPair q = EpsPair::zero(dom);
            unpack(w, q);
            EpsPair Hq = ymh_hessian_apply(p, q);
            VectorXd out = pack(Hq) * cv;
            mask_pair(dom, mask, out);
            return out;
          }};
  LinOp M{(2 + dom.n) * N, [&, mask, w_a](const VectorXd& v) {
            VectorXd w = v * cv;
            for (std::int64_t i = 2 * N; i < (2 + dom.n) * N; ++i) w[i] *= w_a;
            mask_pair(dom, mask, w);
            return w;
          }};
  LinOp prec{(2 + dom.n) * N, [&, mask, w_a](const VectorXd& v) {
               EpsPair q = EpsPair::zero(dom);
               VectorXd w = v;
               unpack(w, q);
               q.phi = helmholtz_inverse(dom, q.phi, 1.0 / eps2) * (0.5 / cv);
               for (int j = 0; j < dom.n; ++j) {
                 ArrayXcd tmp = q.alpha[j].cast<Complex>();
                 tmp = helmholtz_inverse(dom, tmp, 0.5 / eps2) * (0.5 / (eps2 * cv));
                 q.alpha[j] = tmp.real();
               }
               VectorXd out = pack(q);
               mask_pair(dom, mask, out);
               return out;
             }};

  GaugeProjector gp;
  gp.p = &p;
  gp.w_a = w_a;
  gp.mask = mask;
  LinOp projector{(2 + dom.n) * N, [gp](const VectorXd& v) { return gp(v); }};

  EigenOptions opts = req.opts;
  opts.count = req.count;
  const EigenResult er = lobpcg(A, M, &prec,
                                req.gauge == GaugeHandling::projected ? &projector : nullptr,
                                opts);
  res.values = er.values;
  res.residuals = er.residuals;
  res.converged = er.converged;
  res.iterations = er.iterations;
  res.vectors = er.vectors;
  return res;
}

// ---------------------------------------------------------------------------

JacobiSpectrum jacobi_spectrum(const Varifold& gamma,
                               const std::function<bool(const Point&)>& in_U, int count) {
  gamma.validate();
  JacobiSpectrum out;
  std::vector<Real> vals;
  for (const auto& comp : gamma.components) {
    if (comp.kind == VarifoldComponent::Kind::point) {
      if (!in_U || in_U(comp.center))
        for (int d = 0; d < 2; ++d) vals.push_back(0.0);
      continue;
    }
    const Real L = gamma.dom.periods[comp.axis];
    // Trace the mask along the circle to find full coverage or arcs.
    const int S = 4096;
    std::vector<bool> inside(S, true);
    bool all = true, none = false;
    if (in_U) {
      none = true;
      for (int i = 0; i < S; ++i) {
        Point p = comp.center;
        p[comp.axis] = L * i / S;
        inside[i] = in_U(p);
        all = all && inside[i];
        none = none && !inside[i];
      }
    }
    if (none) continue;
    if (all) {
      // Periodic: 0 once plus pairs per Fourier mode, per normal direction.
      for (int d = 0; d < 2; ++d) vals.push_back(0.0);
      for (int k = 1; 2 * k + 2 <= count + 8; ++k) {
        const Real v = std::pow(2.0 * kPi * k / L, 2);
        for (int d = 0; d < 4; ++d) vals.push_back(v);
      }
      continue;
    }
    // Arcs: Dirichlet eigenvalues per maximal arc.
    std::vector<Real> arc_lengths;
    int start = 0;
    while (start < S && inside[start]) ++start;
    if (start == S) start = 0;  // shouldn't happen (handled above)
    int run = 0;
    for (int k = 0; k <= S; ++k) {
      const int i = (start + k) % S;
      if (k < S && inside[i]) {
        ++run;
      } else if (run > 0) {
        arc_lengths.push_back(L * run / S);
        run = 0;
      }
    }
    for (Real len : arc_lengths)
      for (int k = 1; k <= count + 4; ++k) {
        const Real v = std::pow(kPi * k / len, 2);
        for (int d = 0; d < 2; ++d) vals.push_back(v);
      }
  }
  std::sort(vals.begin(), vals.end());
  if (static_cast<int>(vals.size()) > count) vals.resize(count);
  out.values = vals;
  return out;
}

JacobiSpectrum jacobi_spectrum(const Varifold& gamma, int count) {
  return jacobi_spectrum(gamma, nullptr, count);
}

// ---------------------------------------------------------------------------

namespace {

RayleighBounds ritz_on_span(const std::vector<VectorXd>& vecs,
                            const std::function<VectorXd(const VectorXd&)>& applyA,
                            const std::function<VectorXd(const VectorXd&)>& applyM) {
  const int p = static_cast<int>(vecs.size());
  MatrixXd A(p, p), B(p, p);
  std::vector<VectorXd> Av(p), Mv(p);
  for (int i = 0; i < p; ++i) {
    Av[i] = applyA(vecs[i]);
    Mv[i] = applyM(vecs[i]);
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      A(i, j) = vecs[i].dot(Av[j]);
      B(i, j) = vecs[i].dot(Mv[j]);
    }
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();

  Eigen::JacobiSVD<MatrixXd> svd(B);
  RayleighBounds out;
  out.injectivity_margin = svd.singularValues().minCoeff();
  out.gram_condition = svd.singularValues().maxCoeff() / std::max(1e-300, out.injectivity_margin);
  if (out.gram_condition > 1e8)
    throw std::runtime_error("rayleigh_upper_bounds: test basis numerically dependent "
                             "(injectivity failure at this epsilon)");
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(A, B);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("rayleigh_upper_bounds: generalized eigensolve failed");
  out.values.assign(ges.eigenvalues().data(), ges.eigenvalues().data() + p);
  return out;
}

}  // namespace

RayleighBounds rayleigh_upper_bounds(const ScalarField& f,
                                     const std::vector<VectorFieldSpec>& basis,
                                     const ArrayXd& mask_in) {
  f.validate();
  const TorusDomain& dom = f.dom;
  const std::int64_t N = dom.sites();
  const ArrayXd mask = mask_in.size() ? mask_in : full_mask(dom);
  const Real cv = dom.cell_volume();

  std::vector<VectorXd> vecs;
  for (const auto& X : basis) {
    ScalarField phi = f;
    phi.values = ArrayXcd::Zero(N);
    for (std::int64_t idx = 0; idx < N; ++idx) {
      const auto c = dom.coords(idx);
      const Point x = dom.site_point(c);
      const Point Xv = X.value(x);
      Complex acc(0, 0);
      for (int j = 0; j < dom.n; ++j) {
        const Complex g = (f.values[dom.shifted_index(c, j, +1)] -
                           f.values[dom.shifted_index(c, j, -1)]) /
                          (2.0 * dom.spacing(j));
        acc += Xv[j] * g;
      }
      phi.values[idx] = acc * mask[idx];
    }
    vecs.push_back(pack(phi));
  }
  auto applyA = [&](const VectorXd& v) {
    ScalarField tmp = f;
    VectorXd w = v;
    unpack(w, tmp);
    tmp.values = gl_hessian_apply(f, tmp.values);
    VectorXd out = pack(tmp) * cv;
    mask_scalar(dom, mask, out);
    return out;
  };
  auto applyM = [&](const VectorXd& v) { return VectorXd(v * cv); };
  return ritz_on_span(vecs, applyA, applyM);
}

RayleighBounds rayleigh_upper_bounds(const GaugePair& p,
                                     const std::vector<VectorFieldSpec>& basis,
                                     MassPairing pairing, const ArrayXd& mask_in) {
  p.validate();
  const TorusDomain& dom = p.dom;
  const std::int64_t N = dom.sites();
  const ArrayXd mask = mask_in.size() ? mask_in : full_mask(dom);
  const Real cv = dom.cell_volume();
  const Real w_a = pairing == MassPairing::eps_weighted ? p.epsilon * p.epsilon : 1.0;
  const StressField s = ymh_stress(p);
  const auto D = covariant_diff(p);

  std::vector<VectorXd> vecs;
  for (const auto& X : basis) {
    EpsPair q = EpsPair::zero(dom);
    for (std::int64_t idx = 0; idx < N; ++idx) {
      const auto c = dom.coords(idx);
      const Point x = dom.site_point(c);
      const Point Xv = X.value(x);
      // Symmetrised covariant directional derivative.
      Complex acc(0, 0);
      for (int j = 0; j < dom.n; ++j) {
        const Real h = dom.spacing(j);
        const std::int64_t back = dom.shifted_index(c, j, -1);
        const Complex phase_b =
            Complex(std::cos(h * p.a[j][back]), std::sin(h * p.a[j][back]));
        const Complex Db =
            phase_b * fetch_section(p, D[j], c[0] - (j == 0), c[1] - (j == 1), c[2] - (j == 2));
        acc += Xv[j] * 0.5 * (D[j][idx] + Db);
      }
      q.phi[idx] = acc * mask[idx];
      for (int k = 0; k < dom.n; ++k) {
        Real a = 0;
        for (int j = 0; j < dom.n; ++j) a += Xv[j] * s.omega[idx](j, k);
        q.alpha[k][idx] = a * mask[idx];
      }
    }
    vecs.push_back(pack(q));
  }
  auto applyA = [&](const VectorXd& v) {
    EpsPair q = EpsPair::zero(dom);
    VectorXd w = v;
    unpack(w, q);
    VectorXd out = pack(ymh_hessian_apply(p, q)) * cv;
    mask_pair(dom, mask, out);
    return out;
  };
  auto applyM = [&](const VectorXd& v) {
    VectorXd w = v * cv;
    for (std::int64_t i = 2 * N; i < (2 + dom.n) * N; ++i) w[i] *= w_a;
    return w;
  };
  return ritz_on_span(vecs, applyA, applyM);
}

IndexReport make_index_report(const std::vector<Real>& epsilons,
                              const std::vector<std::vector<Real>>& lambda_eps,
                              const JacobiSpectrum& jacobi, Real factor) {
  if (epsilons.empty() || lambda_eps.size() != epsilons.size())
    throw std::invalid_argument("make_index_report: empty or mismatched ladder");
  IndexReport rep;
  rep.epsilons = epsilons;
  rep.lambda_eps = lambda_eps;
  rep.lambda_limit = jacobi.values;
  rep.factor = factor;
  for (size_t s = 0; s < epsilons.size(); ++s) {
    const Real eps = epsilons[s];
    const Real neg_tol = 1e-6 / (eps * eps);
    std::vector<Real> margins;
    int neg = 0;
    for (size_t k = 0; k < lambda_eps[s].size(); ++k) {
      const Real target = k < jacobi.values.size() ? jacobi.values[k] : jacobi.values.back();
      margins.push_back(lambda_eps[s][k] - factor * target);
      if (lambda_eps[s][k] < -neg_tol) ++neg;
    }
    rep.margins.push_back(margins);
    rep.morse_index.push_back(neg);
  }
  for (Real v : jacobi.values)
    if (v < 0) ++rep.limit_index;
  const Real eps_final = epsilons.back();
  rep.tol_at_final = 0.05 / (eps_final * eps_final);
  rep.inequality_ok = true;
  for (Real m : rep.margins.back())
    if (m > rep.tol_at_final) rep.inequality_ok = false;
  return rep;
}

}  // namespace ivlab
