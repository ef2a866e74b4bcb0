#include "core/workflows.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/svg.hpp"
#include "core/trial.hpp"

namespace gpelab {

namespace {

Json point_json(Point p) { return Json::array({p.x, p.y}); }

// NaN and inf become null in JSON
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string field_bytes(const ScalarField& f, const std::string& label) {
  std::ostringstream out(std::ios::binary);
  write_field(out, f, label);
  return out.str();
}

void finish(CommandOutput& out, const std::string& command, const Json& cfg, const RadialProfile& profile) {
  out.files.push_back({"manifest.json", make_manifest(command, cfg, profile, out.files).dump(2) + "\n"});
}

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof a) == 0;
}

// --- townes -----------------------------------------------------------------

CommandOutput townes_command(const Json& cfg) {
  CommandOutput out;
  const TownesOptions opts = townes_options_from(cfg);
  const RadialProfile q = solve_townes(opts);
  const double astar = q.mass();
  Table t;
  t.schema = "gpelab.constants/1";
  t.columns = {"p", "m_p", "lambda", "energy_prefactor"};
  for (double p : cfg.at("p_list").get<std::vector<double>>()) {
    const double l = lambda_of(q, p);
    t.add_row({format_double(p), format_double(moment(q, p)), format_double(l),
               format_double(2.0 / astar * l * l)});
  }
  const double id_kin = std::abs(q.kinetic() / astar - 1.0);
  const double id_quart = std::abs(q.quartic() / (2.0 * astar) - 1.0);
  const Grid2D grid = grid_from(cfg);
  const double J = gn_quotient(sample_to_grid(q, grid, 1.0));
  const double gn = std::abs(J - 0.5 * astar) / (0.5 * astar);

  TownesOptions half = opts;
  half.step = 0.5 * opts.step;
  const double astar_half = solve_townes(half).mass();
  const double halving = std::abs(astar_half / astar - 1.0);

  out.summary = {{"q0", q.q0()},
                 {"astar", astar},
                 {"kinetic", q.kinetic()},
                 {"quartic", q.quartic()},
                 {"identity_kinetic", id_kin},
                 {"identity_quartic", id_quart},
                 {"gn_quotient", J},
                 {"gn_residual", gn},
                 {"astar_half_step", astar_half},
                 {"step_halving", halving},
                 {"tail_coefficient", q.tail().coefficient},
                 {"r_cut", q.tail().r_cut}};
  bool ok = true;
  if (!(id_kin < 1e-6)) ok = false, out.messages.push_back("kinetic identity residual >= 1e-6");
  if (!(id_quart < 1e-6)) ok = false, out.messages.push_back("quartic identity residual >= 1e-6");
  if (!(gn < 1e-6)) ok = false, out.messages.push_back("GN quotient residual >= 1e-6");
  if (!(halving < 1e-4)) ok = false, out.messages.push_back("a* changes by >= 1e-4 under step halving");
  out.summary["checks_passed"] = ok;
  out.status = ok ? kExitOk : kExitInvariant;
  out.files.push_back({"townes.json", profile_to_json(q)});
  out.files.push_back({"constants.csv", t.to_csv()});
  finish(out, "townes", cfg, q);
  return out;
}

// --- single / pair -----------------------------------------------------------

Json component_json(const ScalarField& u, double a, double p, double mu, double quartic,
                    const RadialProfile& profile) {
  const double astar = profile.mass();
  const double eps = a < astar ? std::pow(astar - a, 1.0 / (p + 2.0)) : NAN;
  Point peak{};
  int count = 0;
  bool refined = false;
  double lf = NAN, dist = NAN, delta = NAN;
  const Peak pk = find_peak(u);
  peak = pk.location;
  count = pk.count;
  refined = pk.refined;
  if (eps > 0.0) {
    try {
      const ProfileFit f = rescaled_profile_distance(u, eps, peak, profile);
      lf = f.lambda;
      dist = f.distance;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnderResolved) throw;
    }
    try {
      delta = decay_rate(u, peak, eps);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TailUnresolved) throw;
    }
  }
  return {{"a", a},
          {"eps", num(eps)},
          {"eps_tilde", 1.0 / std::sqrt(quartic)},
          {"mu", mu},
          {"eps2_mu", num(eps * eps * mu)},
          {"quartic", quartic},
          {"peak", point_json(peak)},
          {"peak_count", count},
          {"peak_refined", refined},
          {"lambda_fit", num(lf)},
          {"profile_distance", num(dist)},
          {"decay_rate", num(delta)}};
}

Table cut_table(const std::vector<const ScalarField*>& fields, Point through) {
  const Grid2D& g = fields.front()->grid();
  const int n = g.points_per_side();
  int iy = static_cast<int>(std::lround((through.y + g.half_width()) / g.spacing()));
  iy = std::clamp(iy, 0, n - 1);
  Table t;
  t.schema = "gpelab.cut/1";
  t.columns = {"x", "y"};
  for (std::size_t i = 0; i < fields.size(); ++i) t.columns.push_back("u" + std::to_string(i + 1));
  for (int ix = 0; ix < n; ++ix) {
    std::vector<std::string> row{format_double(g.coord(ix)), format_double(g.coord(iy))};
    for (const ScalarField* f : fields) row.push_back(format_double(f->at(ix, iy)));
    t.add_row(std::move(row));
  }
  return t;
}

Plot cut_plot(const Table& t, const std::string& title) {
  Plot p;
  p.title = title;
  p.xlabel = "x";
  p.ylabel = "u";
  const auto x = t.column("x");
  for (std::size_t k = 2; k < t.columns.size(); ++k) p.series.push_back({t.columns[k], x, t.column(t.columns[k])});
  return p;
}

int solve_exit(SolveStatus s) { return s == SolveStatus::Converged ? kExitOk : kExitSolver; }

CommandOutput single_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const ProblemSpec spec = problem_from(cfg, profile.mass());
  const Grid2D grid = grid_from(cfg);
  const SolveResult r = minimize_single(spec.a1, spec.trap1, grid, solver_from(cfg));
  out.summary = {{"status", status_name(r.status)},
                 {"energy", r.energy},
                 {"residual", r.residual},
                 {"iterations", r.iterations},
                 {"kinetic", r.kinetic[0]},
                 {"potential", r.potential[0]},
                 {"multiplier_discrepancy", r.multiplier_discrepancy},
                 {"component1", component_json(r.fields[0], spec.a1, spec.trap1.p, r.mu[0], r.quartic[0], profile)}};
  const Table cut = cut_table({&r.fields[0]}, find_peak(r.fields[0]).location);
  out.files.push_back({"result.json", out.summary.dump(2) + "\n"});
  out.files.push_back({"cut.csv", cut.to_csv()});
  out.files.push_back({"cut.svg", render_svg(cut_plot(cut, "single-component minimizer"))});
  out.files.push_back({"u1.field", field_bytes(r.fields[0], "u1")});
  out.status = solve_exit(r.status);
  if (out.status) out.messages.push_back(std::string("solver finished with status ") + status_name(r.status));
  finish(out, "single", cfg, profile);
  return out;
}

CommandOutput pair_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const ProblemSpec spec = problem_from(cfg, profile.mass());
  const Grid2D grid = grid_from(cfg);
  const SolveResult r = minimize_pair(spec, grid, solver_from(cfg));
  out.summary = {{"status", status_name(r.status)},
                 {"energy", r.energy},
                 {"component_energy", {r.component_energy[0], r.component_energy[1]}},
                 {"overlap", r.interaction},
                 {"residual", r.residual},
                 {"iterations", r.iterations},
                 {"seed_offset", r.seed_offset},
                 {"multiplier_discrepancy", r.multiplier_discrepancy},
                 {"component1", component_json(r.fields[0], spec.a1, spec.trap1.p, r.mu[0], r.quartic[0], profile)},
                 {"component2", component_json(r.fields[1], spec.a2, spec.trap2.p, r.mu[1], r.quartic[1], profile)}};
  const Table cut = cut_table({&r.fields[0], &r.fields[1]}, find_peak(r.fields[0]).location);
  out.files.push_back({"result.json", out.summary.dump(2) + "\n"});
  out.files.push_back({"cut.csv", cut.to_csv()});
  out.files.push_back({"cut.svg", render_svg(cut_plot(cut, "two-component minimizer"))});
  out.files.push_back({"u1.field", field_bytes(r.fields[0], "u1")});
  out.files.push_back({"u2.field", field_bytes(r.fields[1], "u2")});
  out.status = solve_exit(r.status);
  if (out.status) out.messages.push_back(std::string("solver finished with status ") + status_name(r.status));
  finish(out, "pair", cfg, profile);
  return out;
}

// --- sweep -------------------------------------------------------------------

std::vector<Plot> sweep_plots(const std::vector<SweepRecord>& recs, const std::string& kind, double astar,
                              const Json& cfg) {
  std::vector<double> gap, e, e1, d1, d2, s1, s2;
  const ProblemSpec p = problem_from(cfg, 0.0);
  for (const auto& r : recs) {
    gap.push_back(astar - r.a1);
    e.push_back(r.e);
    e1.push_back(r.e1);
    d1.push_back(r.profile_dist1);
    d2.push_back(r.profile_dist2);
    if (kind == "theorem3") {
      const double sep = distance(r.peak1, r.peak2);
      s1.push_back(sep / r.eps_tilde1);
      s2.push_back(sep / r.eps_tilde2);
    } else {
      s1.push_back(distance(r.peak1, p.trap1.center) / r.eps1);
      s2.push_back(distance(r.peak2, p.trap2.center) / r.eps2);
    }
  }
  const bool pair = !recs.empty() && !std::isnan(recs.front().a2);
  Plot pe{"energy vs distance to a*", "a* - a1", "energy", true, true, {{"e", gap, e}}};
  if (pair) pe.series.push_back({"e1 (single)", gap, e1});
  Plot pd{"rescaled profile distance", "a* - a1", "H1 distance", true, true, {{"component 1", gap, d1}}};
  if (pair) pd.series.push_back({"component 2", gap, d2});
  Plot ps;
  ps.title = kind == "theorem3" ? "peak separation / eps_tilde" : "peak offset / eps";
  ps.xlabel = "a* - a1";
  ps.ylabel = kind == "theorem3" ? "|x1 - x2| / eps_tilde" : "|x_peak - x_trap| / eps";
  ps.log_x = true;
  ps.series.push_back({"component 1", gap, s1});
  if (pair) ps.series.push_back({"component 2", gap, s2});
  return {pe, pd, ps};
}

Json theorem2_json(const Theorem2Report& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"ratio1", num(r.ratio1)}, {"ratio2", num(r.ratio2)}, {"slack", num(r.slack)}, {"sandwich_ok", r.sandwich_ok}});
  Json values = Json::array();
  for (double v : rep.L.values) values.push_back(num(v));
  return {{"rows", rows},
          {"delta0", num(rep.delta0)},
          {"L", {{"regime", regime_name(rep.L.regime)}, {"estimate", num(rep.L.estimate)}, {"trend", num(rep.L.trend)}, {"values", values}}},
          {"sandwich_ok", rep.sandwich_ok},
          {"ratio1_decreasing", rep.ratio1_decreasing},
          {"ratio1_small", rep.ratio1_small},
          {"component2_checked", rep.component2_checked},
          {"ratio2_decreasing", rep.ratio2_decreasing},
          {"ratio2_small", rep.ratio2_small},
          {"distance_ok", rep.distance_ok},
          {"lambda_ok", rep.lambda_ok},
          {"single_peak", rep.single_peak},
          {"passed", rep.passed},
          {"failures", rep.failures}};
}

Json theorem3_json(const Theorem3Report& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"sep1", num(r.sep1)}, {"sep2", num(r.sep2)}, {"drift1", num(r.drift1)}, {"drift2", num(r.drift2)}});
  return {{"rows", rows},
          {"applicable", rep.applicable},
          {"sep_increasing", rep.sep_increasing},
          {"drift_max", num(rep.drift_max)},
          {"drift_ok", rep.drift_ok},
          {"passed", rep.passed},
          {"failures", rep.failures}};
}

Json fit_json(const PowerLawFit& f) {
  return {{"exponent", f.exponent}, {"log_prefactor", f.log_prefactor}, {"prefactor", std::exp(f.log_prefactor)},
          {"r_squared", f.r_squared}, {"first", f.first}, {"count", f.count}, {"accepted", f.accepted}};
}

CommandOutput sweep_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const double astar = profile.mass();
  const SweepConfig sc = sweep_from(cfg, astar);
  const std::vector<SweepRecord> recs = run_sweep(sc, profile);
  bool passed = false;
  const Json diag = sweep_diagnostics(cfg, recs, profile, passed);
  bool hard = false;
  for (const auto& r : recs)
    if (!r.ok) {
      hard = true;
      out.messages.push_back("point " + std::to_string(r.index) + ": " + r.status);
    }
  out.files.push_back({"sweep.csv", sweep_table(recs).to_csv()});
  out.files.push_back({"diagnostics.json", diag.dump(2) + "\n"});
  const std::string kind = cfg.at("diagnostics").at("kind").get<std::string>();
  const auto plots = sweep_plots(recs, kind, astar, cfg);
  out.files.push_back({"energy.svg", render_svg(plots[0])});
  out.files.push_back({"distance.svg", render_svg(plots[1])});
  out.files.push_back({"separation.svg", render_svg(plots[2])});
  out.summary = {{"points", recs.size()}, {"diagnostics", diag}};
  if (!passed)
    for (const auto& f : diag.value("failures", Json::array())) out.messages.push_back(f.get<std::string>());
  out.status = hard ? kExitSolver : (passed ? kExitOk : kExitDiagnostics);
  finish(out, "sweep", cfg, profile);
  return out;
}

// --- trial-energy commands -----------------------------------------------------

CommandOutput unbounded_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const UnboundedConfig uc = unbounded_from(cfg, profile.mass());
  const LadderResult lr = demonstrate_unbounded(uc, grid_from(cfg), profile);
  Table t;
  t.schema = "gpelab.unbounded/1";
  t.columns = {"tau", "kinetic1", "potential1", "quartic1", "kinetic2", "potential2", "quartic2", "overlap", "energy"};
  std::vector<double> taus, energies;
  for (const auto& r : lr.rows) {
    t.add_row({format_double(r.tau), format_double(r.kinetic[0]), format_double(r.potential[0]),
               format_double(r.quartic[0]), format_double(r.kinetic[1]), format_double(r.potential[1]),
               format_double(r.quartic[1]), format_double(r.overlap), format_double(r.energy)});
    taus.push_back(r.tau);
    energies.push_back(r.energy);
  }
  bool decreasing = energies.size() >= 2;
  for (std::size_t k = 1; k < energies.size(); ++k) decreasing = decreasing && energies[k] < energies[k - 1];
  out.summary = {{"taus", taus}, {"energies", energies}, {"skipped", lr.skipped}, {"strictly_decreasing", decreasing}};
  if (!lr.skipped.empty()) out.messages.push_back(std::to_string(lr.skipped.size()) + " tau values not resolved by the grid");
  if (!decreasing) out.messages.push_back("energies are not strictly decreasing in tau");
  out.status = decreasing ? kExitOk : kExitInvariant;
  out.files.push_back({"unbounded.csv", t.to_csv()});
  Plot p{"trial energy for a1 >= a*", "tau", "E(phi_tau, eta)", true, false, {{"energy", taus, energies}}};
  out.files.push_back({"unbounded.svg", render_svg(p)});
  finish(out, "unbounded", cfg, profile);
  return out;
}

CommandOutput trial_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const double astar = profile.mass();
  const auto configs = trial_from(cfg, astar);
  const bool compare = cfg.at("compare").get<bool>();
  const double bound = cfg.at("trial").at("ratio_bound").get<double>();
  Table t;
  t.schema = "gpelab.trial/1";
  t.columns = {"a_frac", "tau", "L", "N", "energy", "ratio", "e_measured", "bound_ok"};
  std::vector<double> gaps, ratios, energies, measured;
  bool ok = true;
  const auto fracs = cfg.at("trial").at("fractions").get<std::vector<double>>();
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const SameTrapConfig& c = configs[k];
    const SameTrapBound b = same_trap_upper_bound(c, profile);
    double e = NAN;
    bool bound_ok = true;
    if (compare) {
      ProblemSpec spec{c.a1, c.a2, c.beta, {c.x0, c.p}, {c.x0, c.p}};
      const SolveResult r = minimize_pair(spec, grid_from(cfg), solver_from(cfg));
      if (!r.converged) out.messages.push_back("comparison solve at " + format_double(fracs[k]) + " did not converge");
      e = r.energy;
      bound_ok = b.energy >= e;
    }
    if (!(b.ratio < bound)) ok = false, out.messages.push_back("ratio above " + format_double(bound) + " at " + format_double(fracs[k]));
    if (!bound_ok) ok = false, out.messages.push_back("trial energy below the minimum at " + format_double(fracs[k]));
    t.add_row({format_double(fracs[k]), format_double(b.tau), format_double(b.half_width), std::to_string(b.points),
               format_double(b.energy), format_double(b.ratio), format_double(e), std::to_string(bound_ok)});
    gaps.push_back(astar - c.a1);
    ratios.push_back(b.ratio);
    energies.push_back(b.energy);
    measured.push_back(e);
  }
  out.summary = {{"ratios", ratios}, {"energies", energies}, {"ratio_bound", bound}, {"passed", ok}};
  if (compare) out.summary["measured"] = measured;
  out.status = ok ? kExitOk : kExitInvariant;
  out.files.push_back({"trial.csv", t.to_csv()});
  Plot p{"same-trap trial energy", "a* - a", "energy", true, true, {{"trial bound", gaps, energies}}};
  if (compare) p.series.push_back({"minimum e", gaps, measured});
  out.files.push_back({"trial.svg", render_svg(p)});
  finish(out, "trial", cfg, profile);
  return out;
}

CommandOutput lemma_a_command(const Json& cfg, const RadialProfile& profile) {
  CommandOutput out;
  const double astar = profile.mass();
  const auto params = lemma_a_from(cfg, astar);
  Table t;
  t.schema = "gpelab.lemma_a/1";
  t.columns = {"kappa", "m", "p", "a_frac", "status", "s1", "f_min", "iterations", "convex",
               "bracket_lower", "bracket_upper", "bracket_holds", "bound_ratio"};
  bool ok = true;
  // (kappa, p, a) -> ratios in m order
  std::map<std::tuple<double, double, double>, std::vector<std::pair<double, double>>> by_m;
  for (const auto& q : params) {
    const std::string af = format_double(q.a / astar);
    try {
      const LemmaAResult r = lemma_a_minimize(q);
      t.add_row({format_double(q.kappa), format_double(q.m), format_double(q.p), af, "ok", format_double(r.s1),
                 format_double(r.f_min), std::to_string(r.iterations), std::to_string(r.convex_at_iterates),
                 format_double(r.bracket_lower), format_double(r.bracket_upper), std::to_string(r.bracket_holds),
                 format_double(r.bound_ratio)});
      if (!r.bracket_holds) ok = false, out.messages.push_back("bracket fails at kappa=" + format_double(q.kappa) + " m=" + format_double(q.m));
      by_m[{q.kappa, q.p, q.a}].push_back({q.m, r.bound_ratio});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfRegime) throw;
      t.add_row({format_double(q.kappa), format_double(q.m), format_double(q.p), af, "out_of_regime", "nan", "nan",
                 "0", "0", "nan", "nan", "0", "nan"});
    }
  }
  bool increasing = true;
  Plot plot{"Lemma A bound ratio", "m", "f(s1) / [d^{p/(p+2)} (ln 1/d)^{2p/(p+2)}]", true, true, {}};
  for (auto& [key, v] : by_m) {
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k < v.size(); ++k) increasing = increasing && v[k].second > v[k - 1].second;
    const auto& [kappa, p, a] = key;
    if (kappa == params.front().kappa && a == params.front().a) {
      Series s{"p=" + format_double(p), {}, {}};
      for (const auto& [m, r] : v) s.x.push_back(m), s.y.push_back(r);
      plot.series.push_back(std::move(s));
    }
  }
  if (!increasing) ok = false, out.messages.push_back("bound ratio not increasing in m");
  out.summary = {{"rows", t.rows.size()}, {"increasing_in_m", increasing}, {"passed", ok}};
  out.status = ok ? kExitOk : kExitInvariant;
  out.files.push_back({"lemma_a.csv", t.to_csv()});
  out.files.push_back({"lemma_a.svg", render_svg(plot)});
  finish(out, "lemma-a", cfg, profile);
  return out;
}

}  // namespace

Json make_manifest(const std::string& command, const Json& cfg, const RadialProfile& profile,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  Json outputs = Json::array();
  for (const auto& [name, contents] : files)
    outputs.push_back({{"name", name}, {"bytes", contents.size()}, {"fnv1a", fnv1a_hex(contents)}});
  Json m = {{"schema", "gpelab.manifest/1"},
            {"artifact", "gpelab"},
            {"version", kVersion},
            {"command", command},
            {"config", cfg},
            {"config_hash", config_hash(cfg)},
            {"astar", profile.mass()},
            {"q0", profile.q0()},
            {"outputs", outputs}};
  if (cfg.contains("grid")) m["grid"] = cfg["grid"];
  if (command == "sweep") {
    Json sched = Json::array();
    for (const auto& [f1, f2] : schedule_fractions(cfg))
      sched.push_back({{"a1", f1 * profile.mass()}, {"a2", f2 * profile.mass()}, {"a1_frac", f1}, {"a2_frac", f2}});
    m["schedule"] = sched;
  }
  return m;
}

Json sweep_diagnostics(const Json& cfg, const std::vector<SweepRecord>& recs, const RadialProfile& profile,
                       bool& passed) {
  const Json& d = cfg.at("diagnostics");
  const std::string kind = d.at("kind").get<std::string>();
  const double astar = profile.mass();
  const ProblemSpec spec = problem_from(cfg, astar);
  const double p1 = spec.trap1.p;
  const double lambda = lambda_of(profile, p1);
  Json out = {{"kind", kind}};
  std::vector<std::string> failures;
  passed = true;

  std::vector<SweepRecord> ok;
  for (const auto& r : recs)
    if (r.ok) ok.push_back(r);

  if (kind == "theorem2") {
    const Theorem2Report rep = theorem2_diagnostics(recs, theorem2_from(cfg, lambda));
    out["theorem2"] = theorem2_json(rep);
    passed = rep.passed;
    failures = rep.failures;
    try {
      const Sandwich s = l4_sandwich(recs);
      const double K = d.at("sandwich_K").get<double>();
      out["l4_sandwich"] = {{"lo", s.lo}, {"hi", s.hi}, {"K", s.K}, {"K_required", K}, {"ok", s.K >= K}};
      if (!(s.K >= K)) passed = false, failures.push_back("L4 sandwich constant below " + format_double(K));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientPoints) throw;
      passed = false;
      failures.push_back("no usable points for the L4 sandwich");
    }
  } else if (kind == "theorem3") {
    const Theorem3Report rep = theorem3_diagnostics(recs, theorem3_from(cfg));
    out["theorem3"] = theorem3_json(rep);
    passed = rep.passed;
    failures = rep.failures;
    std::vector<double> gap, et;
    for (const auto& r : ok) gap.push_back(astar - r.a1), et.push_back(r.eps_tilde1);
    try {
      out["eps_tilde_fit"] = fit_json(fit_power_law(gap, et, 0, d.at("r2_gate").get<double>()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      out["eps_tilde_fit"] = nullptr;
    }
  } else if (kind == "scaling") {
    std::vector<double> gap, e;
    for (const auto& r : ok) gap.push_back(astar - r.a1), e.push_back(r.e1);
    const double target = p1 / (p1 + 2.0);
    const double prefactor = 2.0 / astar * lambda * lambda;
    try {
      const PowerLawFit f = fit_power_law(gap, e, d.at("fit_window").get<std::size_t>(), d.at("r2_gate").get<double>());
      const SweepRecord& fin = ok.back();
      const double final_pref = fin.e1 / std::pow(astar - fin.a1, target);
      const double e2mu = fin.eps1 * fin.eps1 * fin.mu1;
      const bool exp_ok = std::abs(f.exponent - target) <= d.at("exponent_tolerance").get<double>();
      const bool pref_ok = std::abs(final_pref / prefactor - 1.0) <= d.at("prefactor_rel").get<double>();
      const bool mu_ok = std::abs(e2mu / (-lambda * lambda) - 1.0) <= d.at("multiplier_rel").get<double>();
      bool single_peak = true;
      for (const auto& r : ok) single_peak = single_peak && r.peak_count1 == 1;
      out["fit"] = fit_json(f);
      out["exponent_target"] = target;
      out["prefactor_target"] = prefactor;
      out["final_prefactor"] = final_pref;
      out["eps2_mu_final"] = e2mu;
      out["eps2_mu_target"] = -lambda * lambda;
      out["lambda_fit_final"] = num(fin.lambda_fit1);
      out["lambda"] = lambda;
      out["checks"] = {{"exponent", exp_ok}, {"r_squared", f.accepted}, {"prefactor", pref_ok},
                       {"multiplier", mu_ok}, {"single_peak", single_peak}};
      if (!exp_ok) failures.push_back("scaling exponent off target");
      if (!f.accepted) failures.push_back("power-law r^2 below gate");
      if (!pref_ok) failures.push_back("energy prefactor off target");
      if (!mu_ok) failures.push_back("multiplier limit off target");
      if (!single_peak) failures.push_back("more than one peak");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      failures.push_back("not enough converged points for a power-law fit");
    }
    passed = failures.empty();
  }
  for (const auto& r : recs)
    if (!r.ok) passed = false;
  out["passed"] = passed;
  out["failures"] = failures;
  return out;
}

CommandOutput run_command(const std::string& command, const Json& cfg, const RadialProfile& profile) {
  if (command == "townes") return townes_command(cfg);
  if (command == "single") return single_command(cfg, profile);
  if (command == "pair") return pair_command(cfg, profile);
  if (command == "sweep") return sweep_command(cfg, profile);
  if (command == "unbounded") return unbounded_command(cfg, profile);
  if (command == "trial") return trial_command(cfg, profile);
  if (command == "lemma-a") return lemma_a_command(cfg, profile);
  fail(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

CommandOutput run_report(const std::string& csv, const std::string& manifest_text, const RadialProfile& profile) {
  CommandOutput out;
  Json manifest;
  try {
    manifest = Json::parse(manifest_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  if (manifest.value("schema", "") != "gpelab.manifest/1" || manifest.value("command", "") != "sweep")
    fail(ErrorCode::Parse, "not a sweep manifest");
  const Json cfg = resolve_config("sweep", manifest.at("config"));
  const double astar = manifest.at("astar").get<double>();

  bool hash_ok = false;
  for (const auto& o : manifest.at("outputs"))
    if (o.at("name") == "sweep.csv") hash_ok = o.at("fnv1a").get<std::string>() == fnv1a_hex(csv);
  const auto recs = sweep_records(Table::from_csv(csv));

  std::size_t mismatches = 0;
  for (const auto& r : recs) {
    SweepRecord c = r;
    derive_columns(c, astar);
    const bool same = same_bits(c.eps1, r.eps1) && same_bits(c.eps2, r.eps2) && same_bits(c.eps_tilde1, r.eps_tilde1) &&
                      same_bits(c.eps_tilde2, r.eps_tilde2) && same_bits(c.sandwich_slack, r.sandwich_slack);
    if (!same) {
      ++mismatches;
      out.messages.push_back("derived columns differ at point " + std::to_string(r.index));
    }
  }
  if (!hash_ok) out.messages.push_back("sweep.csv does not match the manifest hash");
  if (std::abs(astar - profile.mass()) > 1e-8 * astar)
    out.messages.push_back("reference a* differs from the manifest's");

  bool passed = false;
  const Json diag = sweep_diagnostics(cfg, recs, profile, passed);
  out.summary = {{"points", recs.size()},
                 {"hash_ok", hash_ok},
                 {"derived_mismatches", mismatches},
                 {"config_hash", config_hash(cfg)},
                 {"config_hash_matches", config_hash(cfg) == manifest.value("config_hash", "")},
                 {"diagnostics", diag}};
  out.files.push_back({"report.json", out.summary.dump(2) + "\n"});
  if (mismatches || !hash_ok)
    out.status = kExitInvariant;
  else
    out.status = passed ? kExitOk : kExitDiagnostics;
  return out;
}

}  // namespace gpelab
