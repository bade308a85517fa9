#include "ivlab/variation.hpp"

namespace ivlab {

namespace {

Real pair_with_grad(const StressField& s, const VectorFieldSpec& X, bool use_T,
                    bool absolute = false) {
  const TorusDomain& dom = s.dom;
  const Real cv = dom.cell_volume();
  return cv * block_sum(dom.sites(), [&](std::int64_t idx) {
    const Point x = dom.site_point(dom.coords(idx));
    const Mat3 dX = X.jet(x).dX;  // dX(i,j) = d_i X^j
    const Mat3& M = use_T ? s.T[idx] : s.S[idx];
    Real acc = 0;
    for (int i = 0; i < dom.n; ++i)
      for (int j = 0; j < dom.n; ++j) acc += M(i, j) * dX(i, j);
    return absolute ? std::abs(acc) : acc;
  });
}

SecondVariation second_analytic_impl(const StressField& s, const VectorFieldSpec& X,
                                     Real eps2_cross) {
  const TorusDomain& dom = s.dom;
  const MetricSpec flat = MetricSpec::flat(dom.n);
  const Real cv = dom.cell_volume();
  const std::int64_t S = dom.sites();

  SecondVariation out;
  Real stress_term = 0, omega_cross = 0, div_term = 0, volume_term = 0;

  // Deterministic blocked accumulation of the three integrals.
  constexpr std::int64_t B = 1024;
  const std::int64_t nb = (S + B - 1) / B;
  std::vector<std::array<Real, 5>> partial(static_cast<size_t>(nb), {0, 0, 0, 0, 0});
  parallel_for(nb, [&](std::int64_t b) {
    std::array<Real, 5> acc{0, 0, 0, 0, 0};
    const std::int64_t hi = std::min(S, (b + 1) * B);
    for (std::int64_t idx = b * B; idx < hi; ++idx) {
      const Point x = dom.site_point(dom.coords(idx));
      const MetricVariation mv = metric_variation(X, x, flat);
      const Mat3& Smat = s.S[idx];
      const Mat3 gd = mv.gdot;
      const Mat3 comb = 2.0 * gd * gd - mv.gddot;  // flat: gdot o gdot = gdot^2
      Real t1 = 0, t2 = 0;
      for (int i = 0; i < dom.n; ++i)
        for (int j = 0; j < dom.n; ++j) {
          t1 += 0.5 * comb(i, j) * Smat(i, j);
          t2 += gd(i, j) * Smat(i, j);
        }
      Real cross = 0;
      if (eps2_cross > 0 && !s.omega.empty()) {
        const Mat3 Bm = gd * s.omega[idx];
        cross = -eps2_cross * (Bm * Bm).trace();
      }
      const Real vol = s.energy_density[idx] * mv.vol_ddot;
      acc[0] += t1;
      acc[1] += -t2 * mv.div_X;
      acc[2] += vol;
      acc[3] += cross;
      acc[4] += std::abs(t1 + cross - t2 * mv.div_X + vol);
    }
    partial[static_cast<size_t>(b)] = acc;
  });
  Real scale = 0;
  for (const auto& a : partial) {
    stress_term += a[0];
    div_term += a[1];
    volume_term += a[2];
    omega_cross += a[3];
    scale += a[4];
  }
  out.stress_term = (stress_term + omega_cross) * cv;
  out.omega_cross = omega_cross * cv;
  out.div_term = div_term * cv;
  out.volume_term = volume_term * cv;
  out.integrand_scale = scale * cv;
  out.total = out.stress_term + out.div_term + out.volume_term;
  out.total_half_div = out.stress_term + 0.5 * out.div_term + out.volume_term;
  return out;
}

template <class EnergyAt>
Real first_oracle_impl(EnergyAt&& energy_at, Real tau) {
  const Real e1 = energy_at(tau), em1 = energy_at(-tau);
  const Real e2 = energy_at(2 * tau), em2 = energy_at(-2 * tau);
  return (8.0 * (e1 - em1) - (e2 - em2)) / (12.0 * tau);
}

template <class EnergyAt>
OracleValue second_oracle_impl(EnergyAt&& energy_at, Real tau) {
  const Real e0 = energy_at(0.0);
  const Real e1 = energy_at(tau), em1 = energy_at(-tau);
  const Real e2 = energy_at(2 * tau), em2 = energy_at(-2 * tau);
  OracleValue out;
  out.value = (-e2 + 16.0 * e1 - 30.0 * e0 + 16.0 * em1 - em2) / (12.0 * tau * tau);
  const Real three_point = (e1 - 2.0 * e0 + em1) / (tau * tau);
  out.error_estimate = std::abs(out.value - three_point);
  out.reliable = out.error_estimate <= 10.0 * std::max(1e-12, 5e-3 * std::abs(out.value));
  return out;
}

}  // namespace

Real first_inner_variation_analytic(const ScalarField& f, const VectorFieldSpec& X) {
  return pair_with_grad(gl_stress(f), X, /*use_T=*/true);
}

Real first_inner_variation_analytic(const GaugePair& p, const VectorFieldSpec& X) {
  return pair_with_grad(ymh_stress(p), X, /*use_T=*/true);
}

Real first_inner_variation_scale(const ScalarField& f, const VectorFieldSpec& X) {
  return pair_with_grad(gl_stress(f), X, /*use_T=*/true, /*absolute=*/true);
}

Real first_inner_variation_scale(const GaugePair& p, const VectorFieldSpec& X) {
  return pair_with_grad(ymh_stress(p), X, /*use_T=*/true, /*absolute=*/true);
}

Real first_inner_variation_oracle(const ScalarField& f, const VectorFieldSpec& X, Real tau,
                                  ResampleMethod method) {
  return first_oracle_impl(
      [&](Real t) { return t == 0.0 ? gl_energy_total(f)
                                    : gl_energy_total(resample_pullback(f, X, t, method)); },
      tau);
}

Real first_inner_variation_oracle(const GaugePair& p, const VectorFieldSpec& X, Real tau,
                                  ResampleMethod method) {
  return first_oracle_impl(
      [&](Real t) { return t == 0.0 ? ymh_energy_total(p)
                                    : ymh_energy_total(pullback_pair(p, X, t, method)); },
      tau);
}

SecondVariation second_inner_variation_analytic(const ScalarField& f, const VectorFieldSpec& X) {
  return second_analytic_impl(gl_stress(f), X, /*eps2_cross=*/0.0);
}

SecondVariation second_inner_variation_analytic(const GaugePair& p, const VectorFieldSpec& X) {
  return second_analytic_impl(ymh_stress(p), X, p.epsilon * p.epsilon);
}

OracleValue second_inner_variation_oracle(const ScalarField& f, const VectorFieldSpec& X,
                                          Real tau, ResampleMethod method) {
  return second_oracle_impl(
      [&](Real t) { return t == 0.0 ? gl_energy_total(f)
                                    : gl_energy_total(resample_pullback(f, X, t, method)); },
      tau);
}

OracleValue second_inner_variation_oracle(const GaugePair& p, const VectorFieldSpec& X, Real tau,
                                          ResampleMethod method) {
  return second_oracle_impl(
      [&](Real t) { return t == 0.0 ? ymh_energy_total(p)
                                    : ymh_energy_total(pullback_pair(p, X, t, method)); },
      tau);
}

LimitSecondVariation limit_second_variation(const Varifold& gamma, const VectorFieldSpec& X,
                                            int samples) {
  gamma.validate();
  const MetricSpec flat = MetricSpec::flat(gamma.dom.n);
  LimitSecondVariation out;
  for (const auto& comp : gamma.components) {
    Varifold single{gamma.dom, {comp}};
    const auto na = Varifold::normal_axes(comp, gamma.dom.n);
    const AreaSecondVariation a = second_variation_area(single, X, samples);
    out.d2_area += comp.multiplicity * a.total;

    auto error_density = [&](const Point& p) {
      const MetricVariation mv = metric_variation(X, p, flat);
      const Real daa = mv.gdot(na[0], na[0]), dbb = mv.gdot(na[1], na[1]);
      const Real dab = mv.gdot(na[0], na[1]);
      return 0.25 * (daa - dbb) * (daa - dbb) + dab * dab;
    };
    if (comp.kind == VarifoldComponent::Kind::point) {
      out.error_term += comp.multiplicity * error_density(comp.center);
    } else {
      const auto pts = gamma.samples(comp, std::max(samples, 256));
      const Real ds = gamma.dom.periods[comp.axis] / pts.size();
      Real acc = 0;
      for (const Point& p : pts) acc += error_density(p);
      out.error_term += comp.multiplicity * acc * ds;
    }
  }
  if (out.error_term < -1e-12) throw std::runtime_error("limit_second_variation: negative error term");
  out.total = out.d2_area + out.error_term;
  return out;
}

Real model_normalization(Model m, Real epsilon) {
  if (m == Model::ymh) return 2.0 * kPi;
  if (!(epsilon < 1.0)) throw std::invalid_argument("model_normalization: eps must be < 1 for gl");
  return kPi * std::abs(std::log(epsilon));
}

Real stress_pairing(const StressField& s, const ProbeField& P) {
  const TorusDomain& dom = s.dom;
  return dom.cell_volume() * block_sum(dom.sites(), [&](std::int64_t idx) {
    const Mat3 probe = P(dom.site_point(dom.coords(idx)));
    Real acc = 0;
    for (int i = 0; i < dom.n; ++i)
      for (int j = 0; j < dom.n; ++j) acc += s.S[idx](i, j) * probe(i, j);
    return acc;
  });
}

Real limit_pairing(const Varifold& gamma, const ProbeField& P, Real c, int samples) {
  gamma.validate();
  Real out = 0;
  for (const auto& comp : gamma.components) {
    const auto na = Varifold::normal_axes(comp, gamma.dom.n);
    auto tr_normal = [&](const Point& p) {
      const Mat3 probe = P(p);
      return probe(na[0], na[0]) + probe(na[1], na[1]);
    };
    if (comp.kind == VarifoldComponent::Kind::point) {
      out += comp.multiplicity * c * tr_normal(comp.center);
    } else {
      const auto pts = gamma.samples(comp, std::max(samples, 256));
      const Real ds = gamma.dom.periods[comp.axis] / pts.size();
      Real acc = 0;
      for (const Point& p : pts) acc += tr_normal(p);
      out += comp.multiplicity * c * acc * ds;
    }
  }
  return out;
}

ConcentrationReport concentration_report(const EnergyReport& measure, const ArrayXcd& u,
                                         const TorusDomain& dom, const Varifold& gamma,
                                         Real delta, const std::vector<Real>& radii) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("concentration_report: delta must lie in [0, 1)");
  gamma.validate();
  ConcentrationReport rep;
  rep.radii = radii;
  rep.delta = delta;
  const Real cv = dom.cell_volume();

  ArrayXd dist(dom.sites());
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx)
    dist[idx] = gamma.distance(dom.site_point(dom.coords(idx)));

  for (Real r : radii) {
    Real m = block_sum(dom.sites(), [&](std::int64_t i) {
      return dist[i] <= r ? measure.density[i] : 0.0;
    });
    rep.tube_masses.push_back(m * cv);
  }
  rep.total_mass = measure.total;

  // Hausdorff distance between the sublevel set and Gamma.
  Real diam = 0;
  for (int a = 0; a < dom.n; ++a) diam += 0.25 * dom.periods[a] * dom.periods[a];
  diam = std::sqrt(diam);

  std::vector<Point> sub;
  for (std::int64_t idx = 0; idx < dom.sites(); ++idx)
    if (std::abs(u[idx]) <= delta) sub.push_back(dom.site_point(dom.coords(idx)));
  rep.sublevel_count = static_cast<std::int64_t>(sub.size());
  if (sub.empty()) {
    rep.hausdorff = diam;
    return rep;
  }
  Real d_ab = 0;
  for (const Point& p : sub) d_ab = std::max(d_ab, gamma.distance(p));
  Real d_ba = 0;
  for (const auto& comp : gamma.components) {
    for (const Point& gp : gamma.samples(comp, 128)) {
      Real best = std::numeric_limits<Real>::infinity();
      for (const Point& p : sub) best = std::min(best, dom.distance(gp, p));
      d_ba = std::max(d_ba, best);
    }
  }
  rep.hausdorff = std::max(d_ab, d_ba);
  return rep;
}

}  // namespace ivlab
