#include "ivlab/solve.hpp"

#include "ivlab/fft.hpp"

namespace ivlab {

namespace {

// Stream function with prescribed integer plaquette charges; returns per-link
// phase increments theta(x+e_j) - theta(x) whose plaquette circulations are
// exactly 2 pi * charge (up to the uniform compensating background).
struct PhaseLinks {
  ArrayXd inc0, inc1;  // increments along axis-0 / axis-1 links
};

PhaseLinks quantized_phase_links(const TorusDomain& dom,
                                 const std::vector<std::pair<std::int64_t, int>>& charges) {
  const Real h0 = dom.spacing(0), h1 = dom.spacing(1);
  ArrayXd rho = ArrayXd::Zero(dom.sites());
  Real mean = 0;
  for (auto [idx, q] : charges) {
    rho[idx] += 2.0 * kPi * q / (h0 * h1);
    mean += 2.0 * kPi * q;
  }
  rho -= mean / dom.volume();
  ArrayXd psi = helmholtz_inverse(dom, rho, 0.0);  // -Lap psi = rho
  // Circulation around plaquette P(x) of these increments is
  // -h0 h1 Lap_h psi = h0 h1 rho = 2 pi charge (+ uniform background).
  PhaseLinks out;
  out.inc0 = ArrayXd::Zero(dom.sites());
  out.inc1 = ArrayXd::Zero(dom.sites());
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const auto c = dom.coords(idx);
    const std::int64_t below = dom.shifted_index(c, 1, -1);
    const std::int64_t left = dom.shifted_index(c, 0, -1);
    out.inc0[idx] = (h0 / h1) * (psi[idx] - psi[below]);
    out.inc1[idx] = -(h1 / h0) * (psi[idx] - psi[left]);
  }
  return out;
}

// theta integrated along the row-0 / column spanning tree.
ArrayXd integrate_tree(const TorusDomain& dom, const ArrayXd& inc0, const ArrayXd& inc1) {
  ArrayXd theta = ArrayXd::Zero(dom.sites());
  for (int i = 1; i < dom.grid[0]; ++i)
    theta[dom.index(i, 0)] = theta[dom.index(i - 1, 0)] + inc0[dom.index(i - 1, 0)];
  for (int i = 0; i < dom.grid[0]; ++i)
    for (int j = 1; j < dom.grid[1]; ++j)
      theta[dom.index(i, j)] = theta[dom.index(i, j - 1)] + inc1[dom.index(i, j - 1)];
  return theta;
}

// Subtract the harmonic part so both cycle holonomies of exp(i theta) are
// trivial; without this the wrap seams carry a constant-phase wall.
// `twist_h` is the extra transport phase picked up when the row-0 horizontal
// loop crosses the axis-0 boundary (zero for plain periodic fields).
void quantize_cycle_holonomies(const TorusDomain& dom, ArrayXd& inc0, ArrayXd& inc1,
                               Real twist_h = 0.0) {
  Real h0sum = twist_h;
  for (int i = 0; i < dom.grid[0]; ++i) h0sum += inc0[dom.index(i, 0)];
  const Real d0 = h0sum - 2.0 * kPi * std::round(h0sum / (2.0 * kPi));
  Real h1sum = 0;
  for (int j = 0; j < dom.grid[1]; ++j) h1sum += inc1[dom.index(0, j)];
  const Real d1 = h1sum - 2.0 * kPi * std::round(h1sum / (2.0 * kPi));
  inc0 -= d0 / dom.grid[0];
  inc1 -= d1 / dom.grid[1];
}

std::int64_t nearest_plaquette(const TorusDomain& dom, const Point& p) {
  // Plaquette indexed by its lower-left site; center at site + h/2.
  int i = dom.wrap(static_cast<int>(std::floor(p[0] / dom.spacing(0) - 0.5 + 0.5)), 0);
  int j = dom.wrap(static_cast<int>(std::floor(p[1] / dom.spacing(1) - 0.5 + 0.5)), 1);
  return dom.index(i, j);
}

Point plaquette_center(const TorusDomain& dom, std::int64_t idx) {
  const auto c = dom.coords(idx);
  Point p = dom.site_point(c);
  p[0] += 0.5 * dom.spacing(0);
  p[1] += 0.5 * dom.spacing(1);
  return p;
}

ArrayXcd involution_image(const TorusDomain& dom, const ArrayXcd& u) {
  ArrayXcd out(dom.sites());
  const int half = dom.grid[0] / 2;
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const auto c = dom.coords(idx);
    out[idx] = std::conj(u[dom.index(dom.wrap(c[0] + half, 0), c[1], c[2])]);
  }
  return out;
}

// Generic safeguarded descent on a packed state: Barzilai-Borwein steps with
// Armijo backtracking, then a truncated Newton-CG endgame once the residual
// is small (plain descent crawls through the quasi-null translation and
// gauge directions).
struct Descent {
  std::function<Real(const VectorXd&)> energy;
  std::function<VectorXd(const VectorXd&)> gradient;  // L2 gradient, packed
  // Residual sup-norm derived from the packed gradient (they are
  // proportional for both field models), saving a kernel pass per step.
  std::function<Real(const VectorXd&)> residual_from_grad;
  std::function<VectorXd(const VectorXd& x, const VectorXd& v)> hessian;
  std::function<void(VectorXd&)> project;  // may be empty
  Real dot_weight = 1.0;                   // cell volume for L2 dots
};

struct DescentResult {
  VectorXd x;
  Real residual = 0;
  Real energy = 0;
  std::int64_t iterations = 0;
};

DescentResult run_descent(VectorXd x0, const Descent& d, const SolveConfig& cfg) {
  auto dot = [&](const VectorXd& a, const VectorXd& b) { return d.dot_weight * a.dot(b); };
  VectorXd x = std::move(x0);
  if (d.project) d.project(x);

  Real E = d.energy(x);
  VectorXd g = d.gradient(x);
  if (d.project) d.project(g);

  Real res = d.residual_from_grad(g);
  Real step = cfg.fixed_step;
  VectorXd x_prev, g_prev;
  std::int64_t it = 0;
  const Real step_min = 1e-14, step_max = 1e6;
  const Real newton_gate = std::max(1e-2, 10.0 * cfg.tolerance);
  bool stalled = false;

  // Phase 1: safeguarded BB descent into the Newton basin.
  while (res > cfg.tolerance && (res > newton_gate || !d.hessian) && it < cfg.max_iters) {
    ++it;
    if (cfg.step_rule == SolveConfig::StepRule::barzilai_borwein && it > 1) {
      const VectorXd dx = x - x_prev;
      const VectorXd dg = g - g_prev;
      const Real dgg = dot(dg, dg);
      const Real dxg = dot(dx, dg);
      if (dgg > 0 && dxg > 0)
        step = std::clamp(dxg / dgg, step_min, step_max);  // BB2, monotone-friendly
    }
    const Real g2 = dot(g, g);
    if (!std::isfinite(g2)) throw SolverAbort("minimize: non-finite gradient");
    if (g2 == 0) break;

    Real alpha = step;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      VectorXd xt = x - alpha * g;
      if (d.project) d.project(xt);
      const Real Et = d.energy(xt);
      if (std::isfinite(Et) && Et <= E - 1e-4 * alpha * g2) {
        x_prev = std::move(x);
        g_prev = g;
        x = std::move(xt);
        E = Et;
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < step_min) break;
    }
    if (!accepted) {
      stalled = true;
      break;  // energy flat to rounding; let the Newton phase finish the job
    }
    step = alpha;
    g = d.gradient(x);
    if (d.project) d.project(g);
    res = d.residual_from_grad(g);
  }

  // Phase 2: truncated Newton-CG with Armijo on the energy.
  if (d.hessian) {
    int newton_fails = 0;
    while (res > cfg.tolerance && it < cfg.max_iters && newton_fails < 5) {
      ++it;
      const Real g2 = dot(g, g);
      if (g2 == 0) break;

      // CG on H delta = -g, Steihaug truncation at negative curvature.
      VectorXd delta = VectorXd::Zero(x.size());
      VectorXd r = -g;
      VectorXd p = r;
      Real rr = dot(r, r);
      const Real cg_tol2 = rr * std::pow(std::min(0.25, std::sqrt(res / newton_gate)), 2);
      const int cg_cap = 800;
      for (int cg = 0; cg < cg_cap && rr > cg_tol2 && rr > 1e-300; ++cg) {
        VectorXd Hp = d.hessian(x, p);
        if (d.project) d.project(Hp);
        const Real pHp = dot(p, Hp);
        if (pHp <= 1e-14 * dot(p, p)) break;  // negative/zero curvature: truncate
        const Real a = rr / pHp;
        delta += a * p;
        r -= a * Hp;
        const Real rr_new = dot(r, r);
        p = r + (rr_new / rr) * p;
        rr = rr_new;
      }
      if (delta.squaredNorm() == 0) delta = -g;

      const Real slope = dot(g, delta);
      VectorXd dir = slope < 0 ? delta : VectorXd(-g);
      const Real dslope = slope < 0 ? slope : -g2;
      Real alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        VectorXd xt = x + alpha * dir;
        if (d.project) d.project(xt);
        const Real Et = d.energy(xt);
        if (std::isfinite(Et) && Et <= E + 1e-4 * alpha * dslope) {
          x = std::move(xt);
          E = Et;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        ++newton_fails;
        continue;
      }
      newton_fails = 0;
      g = d.gradient(x);
      if (d.project) d.project(g);
      res = d.residual_from_grad(g);
    }
  }
  if (res > cfg.tolerance && stalled && res > 10 * cfg.tolerance)
    throw SolverAbort("minimize: descent stalled at residual " + std::to_string(res));
  if (!std::isfinite(E)) throw SolverAbort("minimize: non-finite energy");
  DescentResult out;
  out.x = std::move(x);
  out.residual = res;
  out.energy = E;
  out.iterations = it;
  return out;
}

}  // namespace

WindingCensus winding_census(const ScalarField& f) {
  const TorusDomain& dom = f.dom;
  WindingCensus out;
  auto arg_inc = [&](Complex a, Complex b) {
    // principal argument of b/a
    return std::arg(b * std::conj(a));
  };
  for (int i = 0; i < dom.grid[0]; ++i)
    for (int j = 0; j < dom.grid[1]; ++j) {
      const Complex u00 = f.values[dom.index(i, j)];
      const Complex u10 = f.values[dom.index(dom.wrap(i + 1, 0), j)];
      const Complex u11 = f.values[dom.index(dom.wrap(i + 1, 0), dom.wrap(j + 1, 1))];
      const Complex u01 = f.values[dom.index(i, dom.wrap(j + 1, 1))];
      const Real total =
          arg_inc(u00, u10) + arg_inc(u10, u11) + arg_inc(u11, u01) + arg_inc(u01, u00);
      const int w = static_cast<int>(std::lround(total / (2.0 * kPi)));
      if (w > 0) out.plus += w;
      if (w < 0) out.minus -= w;
      if (w != 0) out.zeros.push_back(plaquette_center(dom, dom.index(i, j)));
    }
  return out;
}

ScalarField gl_pair_ansatz(const TorusDomain& dom, Real epsilon, const Point& center_plus) {
  if (dom.n != 2) throw std::invalid_argument("gl_pair_ansatz: requires n = 2");
  Point pp = dom.wrap_point(center_plus);
  Point pm = pp;
  pm[0] = std::fmod(pp[0] + 0.5 * dom.periods[0], dom.periods[0]);
  const std::int64_t plus = nearest_plaquette(dom, pp);
  const std::int64_t minus = nearest_plaquette(dom, pm);
  pp = plaquette_center(dom, plus);
  pm = plaquette_center(dom, minus);
  if (dom.distance(pp, pm) < 4.0 * epsilon)
    throw std::invalid_argument("gl_pair_ansatz: centers closer than 4 eps");

  PhaseLinks links = quantized_phase_links(dom, {{plus, +1}, {minus, -1}});
  quantize_cycle_holonomies(dom, links.inc0, links.inc1);
  const ArrayXd theta = integrate_tree(dom, links.inc0, links.inc1);

  ScalarField f;
  f.dom = dom;
  f.epsilon = epsilon;
  f.values = ArrayXcd::Zero(dom.sites());
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const Point x = dom.site_point(dom.coords(idx));
    const Real env = std::tanh(dom.distance(x, pp) / epsilon) *
                     std::tanh(dom.distance(x, pm) / epsilon);
    f.values[idx] = env * Complex(std::cos(theta[idx]), std::sin(theta[idx]));
  }
  // Land exactly in the fixed-point set of the involution: first align the
  // global phase with the involution image (the tree-integrated phase has an
  // arbitrary offset, and averaging misaligned copies would create spurious
  // zero lines), then symmetrize.
  {
    const ArrayXcd img = involution_image(dom, f.values);
    const Complex overlap = (f.values.conjugate() * img).sum();
    const Real phi = 0.5 * std::arg(overlap);
    f.values *= Complex(std::cos(phi), std::sin(phi));
    f.values = 0.5 * (f.values + involution_image(dom, f.values));
  }
  f.validate();
  return f;
}

GaugePair ymh_vortex_ansatz(const TorusDomain& dom, Real epsilon, int degree,
                            const Point& center) {
  if (dom.n != 2) throw std::invalid_argument("ymh_vortex_ansatz: requires n = 2 (extrude for 3D)");
  if (degree < 1) throw std::invalid_argument("ymh_vortex_ansatz: degree must be >= 1");
  const std::int64_t plaq = nearest_plaquette(dom, center);
  const Point pc = plaquette_center(dom, plaq);

  GaugePair p;
  p.dom = dom;
  p.epsilon = epsilon;
  p.degree = degree;

  // Potential: uniform-flux background plus a periodic correction that
  // concentrates the flux in a Gaussian core of width ~ eps around the
  // center (one-plaquette flux would cost O(eps^2/h^2) curvature energy).
  const Real h0 = dom.spacing(0), h1 = dom.spacing(1);
  {
    const Real sigma = epsilon;
    ArrayXd rho(dom.sites());
    Real total = 0;
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const Real r = dom.distance(plaquette_center(dom, idx), pc);
      rho[idx] = std::exp(-0.5 * r * r / (sigma * sigma));
      total += rho[idx] * h0 * h1;
    }
    rho *= 2.0 * kPi * degree / total;          // total flux 2 pi d
    rho -= rho.sum() * h0 * h1 / dom.volume();  // solvable on the torus
    const ArrayXd psi = helmholtz_inverse(dom, rho, 0.0);  // curl = +rho
    ArrayXd w0(dom.sites()), w1(dom.sites());
    for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
      const auto c = dom.coords(idx);
      w0[idx] = (h0 / h1) * (psi[idx] - psi[dom.shifted_index(c, 1, -1)]);
      w1[idx] = -(h1 / h0) * (psi[idx] - psi[dom.shifted_index(c, 0, -1)]);
    }
    p.a[0] = w0 / h0;
    p.a[1] = background_a1(dom, degree) + (w1 / h1);
  }

  // Section phase: parallel transport along the spanning tree of the
  // auxiliary delta-quantised connection (flat away from the charged
  // plaquette, so every loop closure -- twist phases included -- is a
  // multiple of 2 pi and the tree choice only matters at the core).
  const PhaseLinks links = quantized_phase_links(dom, {{plaq, degree}});
  ArrayXd inc0 = links.inc0;
  ArrayXd inc1 = background_a1(dom, degree) * h1 + links.inc1;
  quantize_cycle_holonomies(dom, inc0, inc1, /*twist_h at row 0 = */ 0.0);
  const ArrayXd theta = integrate_tree(dom, inc0, inc1);

  p.u = ArrayXcd::Zero(dom.sites());
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx) {
    const Point x = dom.site_point(dom.coords(idx));
    const Real env = std::tanh(dom.distance(x, pc) / epsilon);
    p.u[idx] = env * Complex(std::cos(theta[idx]), std::sin(theta[idx]));
  }
  p.validate();
  return p;
}

ScalarField extrude(const ScalarField& f2, const TorusDomain& dom3) {
  if (dom3.n != 3 || f2.dom.n != 2) throw std::invalid_argument("extrude: expects 2D -> 3D");
  if (dom3.grid[0] != f2.dom.grid[0] || dom3.grid[1] != f2.dom.grid[1])
    throw std::invalid_argument("extrude: transverse grids must match");
  ScalarField out;
  out.dom = dom3;
  out.epsilon = f2.epsilon;
  out.values = ArrayXcd::Zero(dom3.sites());
  for (std::int64_t idx = 0; idx < dom3.sites(); ++idx) {
    const auto c = dom3.coords(idx);
    out.values[idx] = f2.values[f2.dom.index(c[0], c[1])];
  }
  return out;
}

GaugePair extrude(const GaugePair& p2, const TorusDomain& dom3) {
  if (dom3.n != 3 || p2.dom.n != 2) throw std::invalid_argument("extrude: expects 2D -> 3D");
  GaugePair out;
  out.dom = dom3;
  out.epsilon = p2.epsilon;
  out.degree = p2.degree;
  out.u = ArrayXcd::Zero(dom3.sites());
  for (int j = 0; j < 3; ++j) out.a[j] = ArrayXd::Zero(dom3.sites());
  for (std::int64_t idx = 0; idx < dom3.sites(); ++idx) {
    const auto c = dom3.coords(idx);
    const std::int64_t i2 = p2.dom.index(c[0], c[1]);
    out.u[idx] = p2.u[i2];
    out.a[0][idx] = p2.a[0][i2];
    out.a[1][idx] = p2.a[1][i2];
  }
  return out;
}

CriticalPoint minimize(const ScalarField& start, const SolveConfig& cfg) {
  start.validate();
  cfg.validate(start.dom);
  ScalarField work = start;
  const TorusDomain dom = start.dom;

  Descent d;
  d.dot_weight = dom.cell_volume();
  d.energy = [&](const VectorXd& v) {
    unpack(v, work);
    return gl_energy_total(work);
  };
  d.gradient = [&](const VectorXd& v) {
    unpack(v, work);
    ScalarField tmp = work;
    tmp.values = gl_gradient(work);
    return pack(tmp);
  };
  const Real eps2 = start.epsilon * start.epsilon;
  d.residual_from_grad = [eps2, N = dom.sites()](const VectorXd& g) {
    Real s = 0;
    for (std::int64_t i = 0; i < N; ++i) s = std::max(s, g[i] * g[i] + g[N + i] * g[N + i]);
    return eps2 * std::sqrt(s);  // residual = -eps^2 * gradient
  };
  ScalarField hwork = start, hdir = start;
  d.hessian = [&](const VectorXd& xv, const VectorXd& v) {
    unpack(xv, hwork);
    unpack(v, hdir);
    ScalarField out = hwork;
    out.values = gl_hessian_apply(hwork, hdir.values);
    return pack(out);
  };
  if (cfg.constraint == SolveConfig::Constraint::gl_pair_involution) {
    d.project = [&](VectorXd& v) {
      unpack(v, work);
      work.values = 0.5 * (work.values + involution_image(dom, work.values));
      v = pack(work);
    };
  }

  const DescentResult r = run_descent(pack(start), d, cfg);
  ScalarField out = start;
  unpack(r.x, out);
  out.spectral.clear();
  CriticalPoint cp;
  cp.state = out;
  cp.residual_sup = r.residual;
  cp.energy = r.energy;
  cp.iterations = r.iterations;
  cp.constraint = cfg.constraint;
  return cp;
}

CriticalPoint minimize(const GaugePair& start, const SolveConfig& cfg) {
  start.validate();
  cfg.validate(start.dom);
  GaugePair work = start;
  const TorusDomain dom = start.dom;

  auto to_state = [&](const VectorXd& v, GaugePair& g) {
    EpsPair q = EpsPair::zero(dom);
    unpack(v, q);
    g.u = q.phi;
    for (int j = 0; j < dom.n; ++j) g.a[j] = q.alpha[j];
  };
  auto from_state = [&](const GaugePair& g) {
    EpsPair q = EpsPair::zero(dom);
    q.phi = g.u;
    for (int j = 0; j < dom.n; ++j) q.alpha[j] = g.a[j];
    return pack(q);
  };

  Descent d;
  d.dot_weight = dom.cell_volume();
  d.energy = [&](const VectorXd& v) {
    to_state(v, work);
    return ymh_energy_total(work);
  };
  d.gradient = [&](const VectorXd& v) {
    to_state(v, work);
    return pack(ymh_gradient(work));
  };
  const Real eps2 = start.epsilon * start.epsilon;
  d.residual_from_grad = [eps2, N = dom.sites(), n = dom.n](const VectorXd& g) {
    // r_u = (eps^2 / 2) grad_u, r_a = grad_a / 2.
    Real su = 0;
    for (std::int64_t i = 0; i < N; ++i) su = std::max(su, g[i] * g[i] + g[N + i] * g[N + i]);
    Real sa = 0;
    for (std::int64_t i = 2 * N; i < (2 + n) * N; ++i) sa = std::max(sa, std::abs(g[i]));
    return std::max(0.5 * eps2 * std::sqrt(su), 0.5 * sa);
  };
  GaugePair hwork = start;
  d.hessian = [&](const VectorXd& xv, const VectorXd& v) {
    to_state(xv, hwork);
    EpsPair q = EpsPair::zero(dom);
    unpack(v, q);
    return pack(ymh_hessian_apply(hwork, q));
  };

  const DescentResult r = run_descent(from_state(start), d, cfg);
  GaugePair out = start;
  to_state(r.x, out);
  out.u_spectral.clear();
  for (auto& s : out.a_spectral) s.clear();
  CriticalPoint cp;
  cp.state = out;
  cp.residual_sup = r.residual;
  cp.energy = r.energy;
  cp.iterations = r.iterations;
  cp.constraint = cfg.constraint;
  return cp;
}

namespace {

bool same_topology(const FieldState& a, const FieldState& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<ScalarField>(a)) {
    const WindingCensus wa = winding_census(std::get<ScalarField>(a));
    const WindingCensus wb = winding_census(std::get<ScalarField>(b));
    return wa.plus == wb.plus && wa.minus == wb.minus;
  }
  return bundle_degree(std::get<GaugePair>(a)) == bundle_degree(std::get<GaugePair>(b));
}

}  // namespace

std::vector<ContinuationStage> epsilon_continuation(const FieldState& initial,
                                                    const SolveConfig& cfg,
                                                    const std::vector<TorusDomain>& grids) {
  if (cfg.ladder.empty()) throw std::invalid_argument("epsilon_continuation: empty ladder");
  std::vector<ContinuationStage> stages;
  FieldState current = initial;

  for (size_t k = 0; k < cfg.ladder.size(); ++k) {
    ContinuationStage stage;
    stage.epsilon = cfg.ladder[k];

    if (k < grids.size()) {
      // Transfer to the requested grid for this stage.
      if (std::holds_alternative<ScalarField>(current)) {
        ScalarField f = std::get<ScalarField>(current);
        if (!f.dom.same_shape(grids[k])) current = regrid(f, grids[k]);
      } else {
        GaugePair p = std::get<GaugePair>(current);
        if (!p.dom.same_shape(grids[k])) current = regrid(p, grids[k]);
      }
    }

    const TorusDomain dom = std::holds_alternative<ScalarField>(current)
                                ? std::get<ScalarField>(current).dom
                                : std::get<GaugePair>(current).dom;
    if (stage.epsilon < 2.0 * dom.max_spacing()) {
      stage.skipped = true;
      stage.note = "epsilon below the 2h grid guard; stage skipped";
      stages.push_back(stage);
      continue;
    }

    SolveConfig scfg = cfg;
    scfg.ladder.clear();
    CriticalPoint cp;
    if (std::holds_alternative<ScalarField>(current)) {
      ScalarField f = std::get<ScalarField>(current);
      f.epsilon = stage.epsilon;
      cp = minimize(f, scfg);
    } else {
      GaugePair p = std::get<GaugePair>(current);
      p.epsilon = stage.epsilon;
      cp = minimize(p, scfg);
    }
    if (!same_topology(current, cp.state))
      throw SolverAbort("epsilon_continuation: topology changed at eps = " +
                        std::to_string(stage.epsilon));
    current = cp.state;
    stage.point = std::move(cp);
    stages.push_back(stage);
  }
  return stages;
}

}  // namespace ivlab
