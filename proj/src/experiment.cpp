#include "ivlab/experiment.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

namespace ivlab {

using nlohmann::json;

namespace {

std::string kind_name(ExperimentConfig::Kind k) {
  switch (k) {
    case ExperimentConfig::Kind::variation_identity: return "variation_identity";
    case ExperimentConfig::Kind::concentration: return "concentration";
    case ExperimentConfig::Kind::limit_formula: return "limit_formula";
    case ExperimentConfig::Kind::spectrum_index: return "spectrum_index";
  }
  return "?";
}

ExperimentConfig::Kind kind_from(const std::string& s) {
  if (s == "variation_identity") return ExperimentConfig::Kind::variation_identity;
  if (s == "concentration") return ExperimentConfig::Kind::concentration;
  if (s == "limit_formula") return ExperimentConfig::Kind::limit_formula;
  if (s == "spectrum_index") return ExperimentConfig::Kind::spectrum_index;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

TorusDomain parse_domain(const json& j) {
  const int n = j.at("n").get<int>();
  auto per = j.at("periods").get<std::vector<Real>>();
  auto grid = j.at("grid").get<std::vector<int>>();
  if (static_cast<int>(per.size()) != n || static_cast<int>(grid.size()) != n)
    throw ConfigError("domain: periods/grid must have n entries");
  std::array<Real, 3> P{1, 1, 1};
  std::array<int, 3> G{1, 1, 1};
  for (int a = 0; a < n; ++a) {
    P[a] = per[a];
    G[a] = grid[a];
  }
  if (n == 2) G[2] = 1;
  try {
    return TorusDomain(n, P, G);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

Varifold parse_gamma(const json& j, const TorusDomain& dom) {
  Varifold g;
  g.dom = dom;
  if (!j.contains("components")) return g;
  for (const auto& cj : j.at("components")) {
    VarifoldComponent c;
    const std::string kind = cj.at("kind").get<std::string>();
    if (kind == "point")
      c.kind = VarifoldComponent::Kind::point;
    else if (kind == "circle")
      c.kind = VarifoldComponent::Kind::circle;
    else
      throw ConfigError("gamma: component kind must be point or circle");
    auto ctr = cj.at("center").get<std::vector<Real>>();
    for (size_t a = 0; a < ctr.size() && a < 3; ++a) c.center[static_cast<int>(a)] = ctr[a];
    if (cj.contains("axis")) c.axis = cj.at("axis").get<int>();
    if (cj.contains("multiplicity")) c.multiplicity = cj.at("multiplicity").get<int>();
    g.components.push_back(c);
  }
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("gamma: ") + e.what());
  }
  return g;
}

VectorFieldSpec make_family(const ExperimentConfig& cfg, const std::string& family, Rng& rng,
                            const TorusDomain& dom) {
  if (family == "constant") {
    Point c;
    c << 0.7, -0.4, 0.3;
    return VectorFieldSpec::constant(dom.n, dom.periods, c);
  }
  if (family == "fourier")
    return VectorFieldSpec::random_fourier(dom.n, dom.periods, rng, cfg.field_max_mode,
                                           cfg.field_amplitude);
  if (family == "normal_shear") {
    const Point center =
        cfg.gamma.components.empty() ? Point::Zero() : cfg.gamma.components.front().center;
    return VectorFieldSpec::normal_shear(dom.n, dom.periods, center, cfg.field_amplitude);
  }
  throw ConfigError("unknown vector-field family '" + family + "'");
}

struct StageState {
  Real epsilon = 0;
  TorusDomain dom;
  FieldState state;
  Real energy = 0;
  Real residual = 0;
  std::int64_t iterations = 0;
};

// Warm-started ladder of solves used by the concentration, limit-formula and
// spectrum experiments.
std::vector<StageState> solve_ladder(const ExperimentConfig& cfg) {
  std::vector<StageState> stages;
  FieldState current;
  const TorusDomain dom0 = cfg.grids.empty() ? cfg.domain : cfg.grids.front();
  if (cfg.model == Model::gl) {
    Point c;
    c << 0.25 * dom0.periods[0], 0.5 * dom0.periods[1], 0;
    if (!cfg.gamma.components.empty()) c = cfg.gamma.components.front().center;
    current = gl_pair_ansatz(dom0, cfg.epsilons.front(), c);
  } else {
    Point c;
    c << 0.5 * dom0.periods[0], 0.5 * dom0.periods[1], 0;
    if (!cfg.gamma.components.empty()) c = cfg.gamma.components.front().center;
    current = ymh_vortex_ansatz(dom0, cfg.epsilons.front(), cfg.degree, c);
  }

  for (size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const TorusDomain dom = k < cfg.grids.size() ? cfg.grids[k] : dom0;
    // Transfer when the grid changes.
    if (std::holds_alternative<ScalarField>(current)) {
      ScalarField f = std::get<ScalarField>(current);
      if (!f.dom.same_shape(dom)) current = regrid(f, dom);
    } else {
      GaugePair p = std::get<GaugePair>(current);
      if (!p.dom.same_shape(dom)) current = regrid(p, dom);
    }
    SolveConfig scfg = cfg.solver;
    scfg.ladder.clear();
    if (cfg.model == Model::gl) scfg.constraint = SolveConfig::Constraint::gl_pair_involution;

    StageState st;
    st.epsilon = cfg.epsilons[k];
    st.dom = dom;
    if (std::holds_alternative<ScalarField>(current)) {
      ScalarField f = std::get<ScalarField>(current);
      f.epsilon = st.epsilon;
      CriticalPoint cp = minimize(f, scfg);
      const WindingCensus w = winding_census(std::get<ScalarField>(cp.state));
      if (w.plus != 1 || w.minus != 1)
        throw SolverAbort("stage " + std::to_string(st.epsilon) + ": winding pattern changed");
      st.state = cp.state;
      st.energy = cp.energy;
      st.residual = cp.residual_sup;
      st.iterations = cp.iterations;
    } else {
      GaugePair p = std::get<GaugePair>(current);
      p.epsilon = st.epsilon;
      CriticalPoint cp = minimize(p, scfg);
      if (bundle_degree(std::get<GaugePair>(cp.state)) != cfg.degree)
        throw SolverAbort("stage " + std::to_string(st.epsilon) + ": bundle degree changed");
      st.state = cp.state;
      st.energy = cp.energy;
      st.residual = cp.residual_sup;
      st.iterations = cp.iterations;
    }
    current = st.state;
    stages.push_back(std::move(st));
  }
  return stages;
}

// Conditioning-aware relative gap: when the signed integral nearly cancels,
// measure against the L^1 mass of the integrand instead.
Real rel_gap(Real a, Real b, Real scale = 0.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale, 1e-10});
}

// ---------------------------------------------------------------------------

void run_variation_identity(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  Rng root(cfg.seed);
  json stages = json::array();
  for (size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const Real eps = cfg.epsilons[k];
    const TorusDomain dom = k < cfg.grids.size() ? cfg.grids[k] : cfg.domain;
    json stage;
    stage["epsilon"] = eps;
    json items = json::array();
    for (int s = 0; s < cfg.states; ++s) {
      Rng rs = root.fork((k + 1) * 1000 + s);
      ScalarField f;
      GaugePair p;
      if (cfg.model == Model::gl)
        f = random_scalar_state(dom, eps, rs, cfg.field_max_mode);
      else
        p = random_gauge_state(dom, eps, rs, cfg.field_max_mode);
      for (int t = 0; t < cfg.probes; ++t) {
        Rng rp = rs.fork(t + 1);
        const VectorFieldSpec X = make_family(cfg, cfg.field_family, rp, dom);
        Real first_an, first_or, first_scale;
        SecondVariation sec;
        OracleValue sec_or;
        if (cfg.model == Model::gl) {
          first_an = first_inner_variation_analytic(f, X);
          first_scale = first_inner_variation_scale(f, X);
          first_or = first_inner_variation_oracle(f, X, cfg.tau);
          sec = second_inner_variation_analytic(f, X);
          sec_or = second_inner_variation_oracle(f, X, cfg.tau);
        } else {
          first_an = first_inner_variation_analytic(p, X);
          first_scale = first_inner_variation_scale(p, X);
          first_or = first_inner_variation_oracle(p, X, cfg.tau);
          sec = second_inner_variation_analytic(p, X);
          sec_or = second_inner_variation_oracle(p, X, cfg.tau);
        }
        const Real rel1 = rel_gap(first_an, first_or, first_scale);
        const Real rel2 = rel_gap(sec.total, sec_or.value, sec.integrand_scale);
        const std::string tag = "s" + std::to_string(s) + "_x" + std::to_string(t);
        csv.row(eps, grid_label(dom), "first_rel_err_" + tag, rel1, cfg.first_tol,
                rel1 <= cfg.first_tol);
        csv.row(eps, grid_label(dom), "second_rel_err_" + tag, rel2, cfg.second_tol,
                rel2 <= cfg.second_tol);
        json item;
        item["state"] = s;
        item["probe"] = t;
        item["first_analytic"] = first_an;
        item["first_oracle"] = first_or;
        item["second_analytic"] = sec.total;
        item["second_oracle"] = sec_or.value;
        item["second_terms"] = {{"stress", sec.stress_term},
                                {"omega_cross", sec.omega_cross},
                                {"div", sec.div_term},
                                {"volume", sec.volume_term}};
        item["oracle_error_estimate"] = sec_or.error_estimate;
        if (cfg.model == Model::ymh) {
          // Which divergence coefficient does the oracle support?
          const Real gap_full = std::abs(sec.total - sec_or.value);
          const Real gap_half = std::abs(sec.total_half_div - sec_or.value);
          item["div_coefficient_full_gap"] = gap_full;
          item["div_coefficient_half_gap"] = gap_half;
          item["div_coefficient_supported"] = gap_full <= gap_half ? "full" : "half";
          csv.info(eps, grid_label(dom), "div_coeff_gap_full_" + tag, gap_full);
          csv.info(eps, grid_label(dom), "div_coeff_gap_half_" + tag, gap_half);
        }
        items.push_back(item);
      }
    }
    stage["items"] = items;
    stages.push_back(stage);
  }
  summary["stages"] = stages;
}

// ---------------------------------------------------------------------------

ProbeField constant_probe(const Mat3& m) {
  return [m](const Point&) { return m; };
}

void run_concentration(const ExperimentConfig& cfg, CsvWriter& csv, json& summary,
                       const std::string& out_dir, std::vector<std::string>& files) {
  const std::vector<StageState> stages = solve_ladder(cfg);
  const Real mass_target = cfg.model == Model::ymh ? static_cast<Real>(cfg.degree) : 2.0;
  const Real mass_tol = cfg.model == Model::ymh ? 0.10 : 0.20;
  const Real trend_slack = 0.01;  // discretisation floor on the deviation trend

  json jstages = json::array();
  Real prev_dev = std::numeric_limits<Real>::infinity();
  Real prev_pairing_dev = std::numeric_limits<Real>::infinity();
  for (size_t k = 0; k < stages.size(); ++k) {
    const StageState& st = stages[k];
    const std::string gl_label = grid_label(st.dom);
    const bool final_stage = k + 1 == stages.size();
    Varifold gamma = cfg.gamma;
    gamma.dom = st.dom;

    EnergyReport measure;
    StressField stress;
    ArrayXcd uvals;
    if (cfg.model == Model::gl) {
      const ScalarField& f = std::get<ScalarField>(st.state);
      measure = gl_energy_measure(f);
      stress = gl_stress(f);
      uvals = f.values;
    } else {
      const GaugePair& p = std::get<GaugePair>(st.state);
      measure = ymh_energy_measure(p);
      stress = ymh_stress(p);
      uvals = p.u;
    }
    csv.info(st.epsilon, gl_label, "energy", st.energy);
    csv.info(st.epsilon, gl_label, "residual_sup", st.residual);
    csv.row(st.epsilon, gl_label, "residual_le_tol", st.residual, cfg.solver.tolerance,
            st.residual <= cfg.solver.tolerance);
    csv.info(st.epsilon, gl_label, "measure_total", measure.total);

    const Real dev = std::abs(measure.total - mass_target) / mass_target;
    csv.row(st.epsilon, gl_label, "mass_deviation", dev, final_stage ? mass_tol : 1.0,
            !final_stage || dev <= mass_tol);
    const bool noninc = dev <= prev_dev + trend_slack;
    if (k > 0) csv.row(st.epsilon, gl_label, "mass_deviation_nonincreasing", dev - prev_dev,
                       trend_slack, noninc);
    prev_dev = dev;

    const ConcentrationReport rep =
        concentration_report(measure, uvals, st.dom, gamma, cfg.delta, cfg.radii);
    for (size_t r = 0; r < rep.radii.size(); ++r)
      csv.info(st.epsilon, gl_label, "tube_mass_r" + format_real(rep.radii[r]),
               rep.tube_masses[r]);
    csv.info(st.epsilon, gl_label, "hausdorff_sublevel", rep.hausdorff);
    if (final_stage)
      csv.row(st.epsilon, gl_label, "sublevel_within_3eps", rep.hausdorff, 3.0 * st.epsilon,
              rep.hausdorff <= 3.0 * st.epsilon);

    // Stress pairings against the three constant probes (normalised).
    const Real c = model_normalization(cfg.model, st.epsilon);
    Mat3 P00 = Mat3::Zero(), P11 = Mat3::Zero(), P01 = Mat3::Zero();
    P00(0, 0) = 1;
    P11(1, 1) = 1;
    P01(0, 1) = P01(1, 0) = 1;
    const Real q00 = stress_pairing(stress, constant_probe(P00)) / c;
    const Real q11 = stress_pairing(stress, constant_probe(P11)) / c;
    const Real q01 = stress_pairing(stress, constant_probe(P01)) / c;
    const Real qtr = q00 + q11 + (st.dom.n == 3
                                      ? stress_pairing(stress, constant_probe(
                                            (Mat3() << 0, 0, 0, 0, 0, 0, 0, 0, 1).finished())) / c
                                      : 0.0);
    csv.info(st.epsilon, gl_label, "pairing_p00_norm", q00);
    csv.info(st.epsilon, gl_label, "pairing_p11_norm", q11);
    csv.info(st.epsilon, gl_label, "pairing_offdiag_norm", q01);
    csv.info(st.epsilon, gl_label, "pairing_trace_norm", qtr);
    const Real pairing_dev =
        std::max({std::abs(q00 - 0.5 * qtr), std::abs(q11 - 0.5 * qtr), std::abs(q01)}) /
        std::max(qtr, 1e-10);
    csv.row(st.epsilon, gl_label, "pairing_isotropy_dev", pairing_dev,
            final_stage ? 0.15 : 1.0, !final_stage || pairing_dev <= 0.15);
    if (k > 0)
      csv.row(st.epsilon, gl_label, "pairing_dev_nonincreasing", pairing_dev - prev_pairing_dev,
              trend_slack, pairing_dev <= prev_pairing_dev + trend_slack);
    prev_pairing_dev = pairing_dev;

    // Limit side of the pairings for reference.
    const Real lim00 = limit_pairing(gamma, constant_probe(P00), 1.0);
    csv.info(st.epsilon, gl_label, "limit_pairing_p00", lim00);

    const std::string base = out_dir + "/stage" + std::to_string(k);
    if (cfg.model == Model::gl)
      save_field(std::get<ScalarField>(st.state), base);
    else
      save_field(std::get<GaugePair>(st.state), base);
    files.push_back(base + ".bin");
    files.push_back(base + ".json");

    json js;
    js["epsilon"] = st.epsilon;
    js["grid"] = gl_label;
    js["energy"] = st.energy;
    js["residual"] = st.residual;
    js["iterations"] = st.iterations;
    js["measure_total"] = measure.total;
    js["mass_deviation"] = dev;
    js["hausdorff"] = rep.hausdorff;
    js["tube_masses"] = rep.tube_masses;
    js["pairings_normalised"] = {{"p00", q00}, {"p11", q11}, {"offdiag", q01}, {"trace", qtr}};
    jstages.push_back(js);
  }
  summary["stages"] = jstages;
  summary["mass_target"] = mass_target;
}

// ---------------------------------------------------------------------------

void run_limit_formula(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const std::vector<StageState> stages = solve_ladder(cfg);
  Rng root(cfg.seed);

  json jstages = json::array();
  Real prev_dev = std::numeric_limits<Real>::infinity();
  for (size_t k = 0; k < stages.size(); ++k) {
    const StageState& st = stages[k];
    const bool final_stage = k + 1 == stages.size();
    const std::string gl_label = grid_label(st.dom);
    Varifold gamma = cfg.gamma;
    gamma.dom = st.dom;
    const Real c = model_normalization(cfg.model, st.epsilon);

    Rng r0 = root.fork(k);
    const VectorFieldSpec killing = make_family(cfg, "constant", r0, st.dom);
    const VectorFieldSpec shear = make_family(cfg, "normal_shear", r0, st.dom);

    SecondVariation sk, sh;
    if (cfg.model == Model::gl) {
      const ScalarField& f = std::get<ScalarField>(st.state);
      sk = second_inner_variation_analytic(f, killing);
      sh = second_inner_variation_analytic(f, shear);
    } else {
      const GaugePair& p = std::get<GaugePair>(st.state);
      sk = second_inner_variation_analytic(p, killing);
      sh = second_inner_variation_analytic(p, shear);
    }
    const LimitSecondVariation lim_k = limit_second_variation(gamma, killing);
    const LimitSecondVariation lim_s = limit_second_variation(gamma, shear);

    // Killing fields: both sides vanish identically.
    const Real killing_gap = std::abs(sk.total / c - lim_k.total);
    csv.row(st.epsilon, gl_label, "killing_gap", killing_gap, 1e-6, killing_gap <= 1e-6);

    const Real lhs = sh.total / c;
    const Real dev = std::abs(lhs - lim_s.total) / std::max(std::abs(lim_s.total), 1e-10);
    csv.info(st.epsilon, gl_label, "shear_lhs_normalised", lhs);
    csv.info(st.epsilon, gl_label, "shear_limit_rhs", lim_s.total);
    csv.info(st.epsilon, gl_label, "shear_limit_d2area", lim_s.d2_area);
    csv.info(st.epsilon, gl_label, "shear_limit_error_term", lim_s.error_term);
    csv.row(st.epsilon, gl_label, "shear_rel_dev", dev, final_stage ? 0.20 : 1.0,
            !final_stage || dev <= 0.20);
    if (k > 0)
      csv.row(st.epsilon, gl_label, "shear_dev_nonincreasing", dev - prev_dev, 0.02,
              dev <= prev_dev + 0.02);
    prev_dev = dev;

    json js;
    js["epsilon"] = st.epsilon;
    js["killing_gap"] = killing_gap;
    js["shear"] = {{"lhs_normalised", lhs},
                   {"rhs", lim_s.total},
                   {"d2_area", lim_s.d2_area},
                   {"error_term", lim_s.error_term},
                   {"rel_dev", dev}};
    jstages.push_back(js);
  }
  summary["stages"] = jstages;
}

// ---------------------------------------------------------------------------

void run_spectrum_index(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  // 2D solves, extruded along axis 2.
  const std::vector<StageState> stages = solve_ladder(cfg);
  const TorusDomain dom3 = TorusDomain::box(cfg.domain.grid[0], cfg.domain.grid[1],
                                            cfg.extrude_sites, cfg.domain.periods[0],
                                            cfg.domain.periods[1], cfg.extrude_period);
  // Limit set: one circle per vortex center (two for the scalar pair).
  Varifold gamma3;
  gamma3.dom = dom3;
  const Real factor = cfg.model == Model::ymh ? 2.0 : 1.0;

  std::vector<Real> eps_list;
  std::vector<std::vector<Real>> lambda_eps;
  json jstages = json::array();
  for (size_t k = 0; k < stages.size(); ++k) {
    const StageState& st = stages[k];
    const std::string gl3 = grid_label(dom3);

    SpectrumRequest req;
    req.count = cfg.count_p;
    req.opts.seed = cfg.seed + 97 * k;
    std::vector<Point> centers;
    if (cfg.model == Model::gl) {
      const ScalarField f3 = extrude(std::get<ScalarField>(st.state), dom3);
      req.state = f3;
      req.pairing = MassPairing::plain;
      const WindingCensus w = winding_census(std::get<ScalarField>(st.state));
      centers = w.zeros;
    } else {
      const GaugePair p3 = extrude(std::get<GaugePair>(st.state), dom3);
      req.state = p3;
      req.pairing = cfg.pairing;
      req.gauge = cfg.gauge;
      // Vortex center: minimum of |u|.
      const GaugePair& p2 = std::get<GaugePair>(st.state);
      std::int64_t best = 0;
      for (std::int64_t i = 0; i < p2.dom.sites(); ++i)
        if (std::abs(p2.u[i]) < std::abs(p2.u[best])) best = i;
      centers.push_back(p2.dom.site_point(p2.dom.coords(best)));
    }
    if (k == 0) {
      for (const Point& c : centers) {
        VarifoldComponent comp;
        comp.kind = VarifoldComponent::Kind::circle;
        comp.center = c;
        comp.axis = 2;
        comp.multiplicity = 1;
        gamma3.components.push_back(comp);
      }
    }

    const SpectrumResult sr = lowest_eigenvalues(req);
    eps_list.push_back(st.epsilon);
    lambda_eps.push_back(sr.values);
    for (size_t i = 0; i < sr.values.size(); ++i) {
      csv.info(st.epsilon, gl3, "lambda_eps_p" + std::to_string(i + 1), sr.values[i]);
      csv.info(st.epsilon, gl3, "eig_residual_p" + std::to_string(i + 1), sr.residuals[i]);
    }

    // Rayleigh upper bounds from parallel normal test fields.
    std::vector<VectorFieldSpec> basis;
    {
      Point e0 = Point::Zero(), e1 = Point::Zero();
      e0[0] = 1;
      e1[1] = 1;
      basis.push_back(VectorFieldSpec::constant(3, dom3.periods, e0));
      basis.push_back(VectorFieldSpec::constant(3, dom3.periods, e1));
      std::vector<VectorFieldSpec::Term> t3{{0, 1.0, {0, 0, 1}, 0.0}};
      basis.push_back(VectorFieldSpec(3, dom3.periods, t3));
      std::vector<VectorFieldSpec::Term> t4{{1, 1.0, {0, 0, 1}, -0.5 * kPi}};
      basis.push_back(VectorFieldSpec(3, dom3.periods, t4));
    }
    RayleighBounds rb;
    bool rb_ok = true;
    try {
      if (cfg.model == Model::gl)
        rb = rayleigh_upper_bounds(std::get<ScalarField>(req.state), basis);
      else
        rb = rayleigh_upper_bounds(std::get<GaugePair>(req.state), basis, req.pairing);
    } catch (const std::exception& e) {
      rb_ok = false;
      csv.info(st.epsilon, gl3, "rayleigh_basis_rejected", 1.0);
    }
    if (rb_ok) {
      csv.info(st.epsilon, gl3, "rayleigh_injectivity_margin", rb.injectivity_margin);
      for (size_t i = 0; i < rb.values.size() && i < sr.values.size(); ++i) {
        csv.info(st.epsilon, gl3, "rayleigh_bound_p" + std::to_string(i + 1), rb.values[i]);
        const bool dominates = rb.values[i] >= sr.values[i] - 1e-6 * (1.0 + std::abs(sr.values[i]));
        csv.row(st.epsilon, gl3, "rayleigh_dominates_p" + std::to_string(i + 1),
                rb.values[i] - sr.values[i], 0.0, dominates);
      }
    }

    json js;
    js["epsilon"] = st.epsilon;
    js["lambda_eps"] = sr.values;
    js["eig_residuals"] = sr.residuals;
    js["eig_converged"] = sr.converged;
    if (rb_ok) {
      js["rayleigh_bounds"] = rb.values;
      js["rayleigh_injectivity_margin"] = rb.injectivity_margin;
    }
    jstages.push_back(js);
  }

  const JacobiSpectrum jac = jacobi_spectrum(gamma3, cfg.count_p);
  const IndexReport rep = make_index_report(eps_list, lambda_eps, jac, factor);
  for (size_t i = 0; i < jac.values.size(); ++i)
    csv.info(eps_list.back(), grid_label(dom3), "lambda_limit_p" + std::to_string(i + 1),
             jac.values[i]);
  for (size_t i = 0; i < rep.margins.back().size(); ++i)
    csv.row(eps_list.back(), grid_label(dom3), "index_margin_p" + std::to_string(i + 1),
            rep.margins.back()[i], rep.tol_at_final, rep.margins.back()[i] <= rep.tol_at_final);
  csv.row(eps_list.back(), grid_label(dom3), "index_inequality", rep.inequality_ok ? 1.0 : 0.0,
          1.0, rep.inequality_ok);

  summary["stages"] = jstages;
  summary["lambda_limit"] = jac.values;
  summary["factor"] = factor;
  json jm = json::array();
  for (const auto& m : rep.margins) jm.push_back(m);
  summary["margins"] = jm;
  summary["morse_index"] = rep.morse_index;
  summary["limit_index"] = rep.limit_index;
  summary["inequality_ok"] = rep.inequality_ok;
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  domain.validate();
  if (epsilons.empty()) throw ConfigError("epsilons: at least one ladder entry required");
  for (size_t i = 1; i < epsilons.size(); ++i)
    if (!(epsilons[i] < epsilons[i - 1]))
      throw ConfigError("epsilons: ladder must be strictly decreasing");
  for (size_t k = 0; k < epsilons.size(); ++k) {
    const TorusDomain& dom = k < grids.size() ? grids[k] : domain;
    if (!(epsilons[k] >= 2.0 * dom.max_spacing()))
      throw ConfigError("epsilons[" + std::to_string(k) +
                        "]: below the resolution guard eps >= 2h for its grid");
  }
  if (!grids.empty() && grids.size() != epsilons.size())
    throw ConfigError("grids: when given, one grid per ladder entry is required");
  if (states < 1 || probes < 1) throw ConfigError("states/probes must be >= 1");
  if (!(tau > 0)) throw ConfigError("tau must be positive");
  if (!(delta >= 0 && delta < 1)) throw ConfigError("delta must lie in [0,1)");
  if (degree < 1) throw ConfigError("degree must be >= 1");
  if (count_p < 1) throw ConfigError("count_p must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (kind == Kind::spectrum_index) {
    if (domain.n != 2) throw ConfigError("spectrum_index: base domain must be 2D (extruded internally)");
    if (extrude_sites < 8 || extrude_sites % 2 != 0)
      throw ConfigError("extrude_sites must be even and >= 8");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (!j.contains("format_version")) throw ConfigError("missing format_version");
    if (j.at("format_version").get<int>() != 1) throw ConfigError("unsupported format_version");
    cfg.kind = kind_from(j.at("experiment").get<std::string>());
    const std::string model = j.at("model").get<std::string>();
    if (model == "gl")
      cfg.model = Model::gl;
    else if (model == "ymh")
      cfg.model = Model::ymh;
    else
      throw ConfigError("model must be gl or ymh");
    cfg.domain = parse_domain(j.at("domain"));
    cfg.epsilons = j.at("epsilons").get<std::vector<Real>>();
    if (j.contains("grids"))
      for (const auto& g : j.at("grids")) cfg.grids.push_back(parse_domain(g));
    if (j.contains("vector_field")) {
      const auto& vf = j.at("vector_field");
      if (vf.contains("family")) cfg.field_family = vf.at("family").get<std::string>();
      if (vf.contains("amplitude")) cfg.field_amplitude = vf.at("amplitude").get<Real>();
      if (vf.contains("max_mode")) cfg.field_max_mode = vf.at("max_mode").get<int>();
    }
    if (j.contains("gamma")) cfg.gamma = parse_gamma(j.at("gamma"), cfg.domain);
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      if (s.contains("tolerance")) cfg.solver.tolerance = s.at("tolerance").get<Real>();
      if (s.contains("max_iters")) cfg.solver.max_iters = s.at("max_iters").get<std::int64_t>();
      if (s.contains("step_rule")) {
        const std::string r = s.at("step_rule").get<std::string>();
        if (r == "fixed")
          cfg.solver.step_rule = SolveConfig::StepRule::fixed;
        else if (r == "bb")
          cfg.solver.step_rule = SolveConfig::StepRule::barzilai_borwein;
        else
          throw ConfigError("solver.step_rule must be fixed or bb");
      }
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("states")) cfg.states = j.at("states").get<int>();
    if (j.contains("probes")) cfg.probes = j.at("probes").get<int>();
    if (j.contains("tau")) cfg.tau = j.at("tau").get<Real>();
    if (j.contains("first_tol")) cfg.first_tol = j.at("first_tol").get<Real>();
    if (j.contains("second_tol")) cfg.second_tol = j.at("second_tol").get<Real>();
    if (j.contains("delta")) cfg.delta = j.at("delta").get<Real>();
    if (j.contains("radii")) cfg.radii = j.at("radii").get<std::vector<Real>>();
    if (j.contains("degree")) cfg.degree = j.at("degree").get<int>();
    if (j.contains("count_p")) cfg.count_p = j.at("count_p").get<int>();
    if (j.contains("gauge")) {
      const std::string g = j.at("gauge").get<std::string>();
      if (g == "raw")
        cfg.gauge = GaugeHandling::raw;
      else if (g == "projected")
        cfg.gauge = GaugeHandling::projected;
      else
        throw ConfigError("gauge must be raw or projected");
    }
    if (j.contains("mass_pairing")) {
      const std::string m = j.at("mass_pairing").get<std::string>();
      if (m == "plain")
        cfg.pairing = MassPairing::plain;
      else if (m == "eps")
        cfg.pairing = MassPairing::eps_weighted;
      else
        throw ConfigError("mass_pairing must be plain or eps");
    }
    if (j.contains("extrude_sites")) cfg.extrude_sites = j.at("extrude_sites").get<int>();
    if (j.contains("extrude_period")) cfg.extrude_period = j.at("extrude_period").get<Real>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  set_thread_cap(cfg.threads);
  std::filesystem::create_directories(cfg.out_dir);
  RunResult result;

  CsvWriter csv(kind_name(cfg.kind), cfg.model == Model::gl ? "gl" : "ymh");
  json summary;
  summary["format_version"] = 1;
  summary["experiment"] = kind_name(cfg.kind);
  summary["model"] = cfg.model == Model::gl ? "gl" : "ymh";
  summary["seed"] = cfg.seed;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.kind) {
      case ExperimentConfig::Kind::variation_identity:
        run_variation_identity(cfg, csv, summary);
        break;
      case ExperimentConfig::Kind::concentration:
        run_concentration(cfg, csv, summary, cfg.out_dir, result.files);
        break;
      case ExperimentConfig::Kind::limit_formula:
        run_limit_formula(cfg, csv, summary);
        break;
      case ExperimentConfig::Kind::spectrum_index:
        run_spectrum_index(cfg, csv, summary);
        break;
    }
  } catch (const SolverAbort& e) {
    result.exit_code = 3;
    result.checks_passed = false;
    result.message = e.what();
    std::ofstream err(cfg.out_dir + "/error.txt");
    err << "solver abort: " << e.what() << "\n";
    return result;
  }
  const auto t1 = std::chrono::steady_clock::now();

  const std::string csv_path = cfg.out_dir + "/results.csv";
  csv.write(csv_path);
  result.files.push_back(csv_path);

  const std::string summary_path = cfg.out_dir + "/summary.json";
  {
    std::ofstream out(summary_path);
    out << summary.dump(2) << "\n";
  }
  result.files.push_back(summary_path);

  json manifest;
  manifest["format_version"] = 1;
  manifest["experiment"] = kind_name(cfg.kind);
  manifest["seed"] = cfg.seed;
  manifest["wall_clock_seconds"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
  manifest["all_checks_passed"] = csv.all_passed();
  json jf = json::array();
  for (const auto& f : result.files) jf.push_back({{"path", f}, {"digest", file_digest(f)}});
  manifest["files"] = jf;
  {
    std::ofstream out(cfg.out_dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
  }

  result.checks_passed = csv.all_passed();
  result.exit_code = result.checks_passed ? 0 : 1;
  return result;
}

std::vector<std::string> list_experiments() {
  return {"variation_identity", "concentration", "limit_formula", "spectrum_index"};
}

std::string describe_experiment(const std::string& kind) {
  kind_from(kind);  // validates
  std::ostringstream ss;
  if (kind == "variation_identity") {
    ss << "variation_identity: draws random smooth non-critical states and smooth periodic\n"
          "vector fields, then checks that the tensor-calculus expressions for the first and\n"
          "second derivative of the energy under the flow of the field match centered finite\n"
          "differences of the energy of the pulled-back state (relative tolerances first_tol\n"
          "and second_tol). Config: domain, model, epsilons, states, probes, tau, seed.";
  } else if (kind == "concentration") {
    ss << "concentration: solves a vortex state along a decreasing epsilon ladder and tracks\n"
          "the normalised energy measure (mass trend towards the quantised target), tube\n"
          "masses around the concentration set, the |u| <= delta sublevel set in Hausdorff\n"
          "distance, and stress pairings against constant probes (isotropy of the normal\n"
          "plane). Config: domain, model, epsilons, grids, gamma, solver, delta, radii, seed.";
  } else if (kind == "limit_formula") {
    ss << "limit_formula: compares the normalised second derivative of the energy under the\n"
          "flow of named vector-field families against the second variation of area of the\n"
          "concentration set plus the non-negative defect term; a constant (Killing) family\n"
          "must give exact zero, a normal-shear family must converge along the ladder.\n"
          "Config: domain, model, epsilons, grids, gamma, solver, seed.";
  } else {
    ss << "spectrum_index: solves 2D vortex states, extrudes them along a short third axis,\n"
          "computes the lowest Hessian eigenvalues (gauge-projected for the gauge model,\n"
          "eps-weighted mass pairing), closed-form Jacobi eigenvalues of the limit circles,\n"
          "Rayleigh upper bounds from pushforward test fields, and checks the index\n"
          "inequality margins. Config: domain (2D), model, epsilons, count_p, extrude_sites,\n"
          "extrude_period, gauge, mass_pairing, seed.";
  }
  return ss.str();
}

}  // namespace ivlab
