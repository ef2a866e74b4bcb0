#include "core/config.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/io.hpp"

namespace gpelab {

namespace {

const std::vector<std::string> kCommands = {"townes", "single", "pair", "sweep", "unbounded", "trial", "lemma-a"};

Json point(double x, double y) { return Json::array({x, y}); }

Json trap(double x, double y, double p) { return {{"center", point(x, y)}, {"p", p}}; }

Json solver_defaults() {
  return {{"method", "cg"},        {"tolerance", 1e-6}, {"energy_tolerance", 1e-12},
          {"max_iterations", 20000}, {"dt0", 0.1},       {"seed_width", 1.0},
          {"extra_offsets", Json::array()}};
}

Json sweep_defaults(const std::string& preset) {
  Json j = {
      {"preset", "theorem2"},
      {"mode", "pair"},
      {"schedule", {{"fractions", {0.90, 0.95, 0.98, 0.99, 0.995}}}},
      {"problem", {{"beta", 1.0}, {"trap1", trap(-1, 0, 2)}, {"trap2", trap(1, 0, 2)}}},
      {"grid", {{"L", 8.0}, {"N", 256}, {"max_N", 1024}, {"cells_per_core", 4.0}, {"auto_refine", true}}},
      {"solver", solver_defaults()},
      {"warm_start", true},
      {"jobs", 1},
      {"diagnostics",
       {{"kind", "theorem2"},
        {"ratio_bound", 0.5},
        {"distance_bound", 0.05},
        {"lambda_rel", 0.1},
        {"last", 3},
        {"L_thresholds", {0.5, 2.0}},
        {"x0", point(0, 0)},
        {"drift_bound", 10.0},
        {"fit_window", 5},
        {"r2_gate", 0.98},
        {"exponent_tolerance", 0.05},
        {"prefactor_rel", 0.1},
        {"multiplier_rel", 0.1},
        {"sandwich_K", 0.1}}},
      {"paths", {{"q_reference", ""}}}};
  if (preset == "theorem3") {
    j["preset"] = "theorem3";
    j["schedule"] = {{"fractions", {0.90, 0.95, 0.98, 0.99}}};
    j["problem"]["trap1"] = trap(0, 0, 2);
    j["problem"]["trap2"] = trap(0, 0, 2);
    j["solver"]["extra_offsets"] = {0.5};
    j["diagnostics"]["kind"] = "theorem3";
  } else if (preset == "scaling") {
    j["preset"] = "scaling";
    j["mode"] = "single";
    j["problem"]["trap1"] = trap(0, 0, 2);
    j["diagnostics"]["kind"] = "scaling";
  } else if (!preset.empty() && preset != "theorem2") {
    fail(ErrorCode::InvalidArgument, "unknown preset '" + preset + "'");
  }
  return j;
}

// keys of `user` must exist in `defaults`, recursively through objects
void check_keys(const Json& defaults, const Json& user, const std::string& where) {
  if (!user.is_object() || !defaults.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (where == "schedule") {
      if (it.key() != "fractions" && it.key() != "pairs" && it.key() != "geometric")
        fail(ErrorCode::InvalidArgument, "unknown schedule form '" + it.key() + "'");
      continue;
    }
    if (!defaults.contains(it.key()))
      fail(ErrorCode::InvalidArgument,
           "unknown config key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    check_keys(defaults[it.key()], it.value(), where.empty() ? it.key() : where + "." + it.key());
  }
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config '") + key + "': " + e.what());
  }
}

Point point_from(const Json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  require(v.size() == 2, std::string("config '") + key + "' must be [x, y]");
  return {v[0], v[1]};
}

TrapSpec trap_from(const Json& j, const char* key) {
  const Json& t = j.at(key);
  return {point_from(t, "center"), get<double>(t, "p")};
}

void validate_grid(const Json& g) {
  const double L = get<double>(g, "L");
  const int N = get<int>(g, "N");
  require(L > 0.0 && std::isfinite(L), "grid.L must be positive");
  require(N >= 32 && N % 2 == 0, "grid.N must be even and >= 32");
  if (g.contains("max_N")) require(get<int>(g, "max_N") >= N, "grid.max_N must be >= grid.N");
  if (g.contains("cells_per_core")) require(get<double>(g, "cells_per_core") > 0.0, "grid.cells_per_core must be positive");
}

void validate_solver(const Json& s) {
  const std::string m = get<std::string>(s, "method");
  require(m == "cg" || m == "gradient_flow", "solver.method must be 'cg' or 'gradient_flow'");
  require(get<double>(s, "tolerance") > 0.0, "solver.tolerance must be positive");
  require(get<double>(s, "energy_tolerance") >= 0.0, "solver.energy_tolerance must be >= 0");
  require(get<int>(s, "max_iterations") >= 1, "solver.max_iterations must be >= 1");
  require(get<double>(s, "dt0") > 0.0, "solver.dt0 must be positive");
  require(get<double>(s, "seed_width") > 0.0, "solver.seed_width must be positive");
  get<std::vector<double>>(s, "extra_offsets");
}

void validate_trap(const Json& j, const char* key) {
  const TrapSpec t = trap_from(j, key);
  require(t.p > 0.0, std::string(key) + ".p must be positive");
}

void validate_fraction(double f, bool allow_above, const std::string& name) {
  require(std::isfinite(f) && f >= 0.0, name + " must be >= 0");
  if (!allow_above) require(f <= 1.0, name + " above a* is only allowed for 'unbounded'");
}

void validate(const std::string& cmd, const Json& c) {
  if (c.contains("grid")) validate_grid(c["grid"]);
  if (c.contains("solver")) validate_solver(c["solver"]);
  if (cmd == "townes") {
    const Json& t = c["townes"];
    const double tol = get<double>(t, "tolerance");
    require(tol > 0.0 && tol <= 1e-6, "townes.tolerance must lie in (0, 1e-6]");
    require(get<double>(t, "r_max") >= 15.0, "townes.r_max must be >= 15");
    const double step = get<double>(t, "step");
    require(step > 0.0 && step <= 0.05, "townes.step must lie in (0, 0.05]");
    for (double p : get<std::vector<double>>(c, "p_list")) require(p > 0.0, "p_list entries must be positive");
  } else if (cmd == "single" || cmd == "pair") {
    const Json& p = c["problem"];
    validate_fraction(get<double>(p, "a1_frac"), false, "problem.a1_frac");
    validate_fraction(get<double>(p, "a2_frac"), false, "problem.a2_frac");
    require(get<double>(p, "beta") >= 0.0, "problem.beta must be >= 0");
    validate_trap(p, "trap1");
    validate_trap(p, "trap2");
  } else if (cmd == "sweep") {
    const std::string mode = get<std::string>(c, "mode");
    require(mode == "pair" || mode == "single", "mode must be 'pair' or 'single'");
    const Json& p = c["problem"];
    require(get<double>(p, "beta") >= 0.0, "problem.beta must be >= 0");
    validate_trap(p, "trap1");
    validate_trap(p, "trap2");
    const auto sched = schedule_fractions(c);
    require(!sched.empty(), "schedule is empty");
    for (const auto& [f1, f2] : sched) {
      validate_fraction(f1, false, "schedule entry");
      validate_fraction(f2, false, "schedule entry");
      require(f1 < 1.0 && f2 < 1.0, "schedule entries must be below a*");
    }
    require(get<int>(c, "jobs") >= 1, "jobs must be >= 1");
    const std::string kind = get<std::string>(c["diagnostics"], "kind");
    require(kind == "theorem2" || kind == "theorem3" || kind == "scaling" || kind == "none",
            "diagnostics.kind must be theorem2, theorem3, scaling or none");
  } else if (cmd == "unbounded") {
    const Json& u = c["unbounded"];
    const double a1 = get<double>(u, "a1_frac");
    validate_fraction(a1, true, "unbounded.a1_frac");
    require(a1 >= 1.0, "unbounded.a1_frac must be >= 1");
    validate_fraction(get<double>(u, "a2_frac"), false, "unbounded.a2_frac");
    require(get<double>(u, "beta") >= 0.0, "unbounded.beta must be >= 0");
    validate_trap(u, "trap1");
    validate_trap(u, "trap2");
    for (double t : get<std::vector<double>>(u, "taus")) require(t > 1.0, "taus must be > 1");
  } else if (cmd == "trial") {
    const Json& t = c["trial"];
    for (double f : get<std::vector<double>>(t, "fractions")) {
      validate_fraction(f, false, "trial.fractions entry");
      require(f < 1.0, "trial.fractions entries must be below 1");
    }
    require(get<double>(t, "p") > 0.0, "trial.p must be positive");
    require(get<double>(t, "beta") >= 0.0, "trial.beta must be >= 0");
  } else if (cmd == "lemma-a") {
    const Json& l = c["lemma_a"];
    for (double k : get<std::vector<double>>(l, "kappa")) require(k > 0.0, "kappa must be positive");
    for (double m : get<std::vector<double>>(l, "m")) require(m > 0.0, "m must be positive");
    for (double p : get<std::vector<double>>(l, "p")) require(p > 0.0, "p must be positive");
    for (double f : get<std::vector<double>>(l, "a_frac")) require(f > 0.0 && f < 1.0, "a_frac must lie in (0, 1)");
  }
}

}  // namespace

bool known_command(const std::string& command) {
  for (const auto& c : kCommands)
    if (c == command) return true;
  return false;
}

Json default_config(const std::string& cmd, const std::string& preset) {
  if (cmd == "townes")
    return {{"townes", {{"tolerance", 1e-10}, {"r_max", 20.0}, {"step", 1e-3}}},
            {"p_list", {1.0, 2.0, 3.0, 4.0}},
            {"grid", {{"L", 12.0}, {"N", 256}}}};
  if (cmd == "single" || cmd == "pair") {
    const bool pair = cmd == "pair";
    return {{"grid", {{"L", 8.0}, {"N", 256}}},
            {"solver", solver_defaults()},
            {"problem",
             {{"a1_frac", 0.9},
              {"a2_frac", pair ? 0.9 : 0.0},
              {"beta", pair ? 1.0 : 0.0},
              {"trap1", pair ? trap(-1, 0, 2) : trap(0, 0, 2)},
              {"trap2", trap(1, 0, 2)}}},
            {"paths", {{"q_reference", ""}}}};
  }
  if (cmd == "sweep") return sweep_defaults(preset);
  if (cmd == "unbounded")
    return {{"unbounded",
             {{"a1_frac", 1.1},
              {"a2_frac", 0.0},
              {"beta", 1.0},
              {"taus", {10.0, 20.0, 40.0}},
              {"trap1", trap(-1, 0, 2)},
              {"trap2", trap(1, 0, 2)},
              {"xbar1", point(-1, 0)},
              {"eta_center", point(1, 0)},
              {"eta_radius", 1.0},
              {"R", 1.0},
              {"C0", 3.0},
              {"n", point(1, 0)}}},
            {"grid", {{"L", 4.0}, {"N", 2048}}},
            {"paths", {{"q_reference", ""}}}};
  if (cmd == "trial")
    return {{"trial",
             {{"fractions", {0.97, 0.98, 0.99, 0.995}},
              {"p", 2.0},
              {"beta", 1.0},
              {"x0", point(0, 0)},
              {"C0", 3.0},
              {"n", point(1, 0)},
              {"tau_R", 12.0},
              {"ratio_bound", 5.0}}},
            {"compare", false},
            {"grid", {{"L", 8.0}, {"N", 256}}},
            {"solver", [] {
               Json s = solver_defaults();
               s["extra_offsets"] = {0.5};
               return s;
             }()},
            {"paths", {{"q_reference", ""}}}};
  if (cmd == "lemma-a")
    return {{"lemma_a",
             {{"kappa", {1e4, 1e5, 1e6}},
              {"m", {10.0, 100.0, 1000.0}},
              {"p", {1.0, 2.0, 3.0}},
              {"a_frac", {0.99, 0.999}}}},
            {"paths", {{"q_reference", ""}}}};
  fail(ErrorCode::InvalidArgument, "unknown command '" + cmd + "'");
}

Json resolve_config(const std::string& cmd, const Json& user) {
  if (!user.is_null() && !user.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  std::string preset;
  if (user.is_object() && user.contains("preset")) {
    require(cmd == "sweep", "'preset' only applies to 'sweep'");
    preset = get<std::string>(user, "preset");
  }
  Json cfg = default_config(cmd, preset);
  if (user.is_object()) {
    check_keys(cfg, user, "");
    Json patch = user;
    // schedule forms are alternatives, not fields to merge
    if (patch.contains("schedule")) {
      cfg["schedule"] = patch["schedule"];
      patch.erase("schedule");
    }
    cfg.merge_patch(patch);
  }
  try {
    validate(cmd, cfg);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const Json& resolved) { return fnv1a_hex(resolved.dump()); }

TownesOptions townes_options_from(const Json& c) {
  const Json& t = c.at("townes");
  return {get<double>(t, "tolerance"), get<double>(t, "r_max"), get<double>(t, "step")};
}

Grid2D grid_from(const Json& c) {
  const Json& g = c.at("grid");
  return Grid2D(get<double>(g, "L"), get<int>(g, "N"));
}

MinimizeOptions solver_from(const Json& c) {
  const Json& s = c.at("solver");
  MinimizeOptions o;
  o.method = get<std::string>(s, "method") == "cg" ? Method::ConjugateGradient : Method::GradientFlow;
  o.tolerance = get<double>(s, "tolerance");
  o.energy_tolerance = get<double>(s, "energy_tolerance");
  o.max_iterations = get<int>(s, "max_iterations");
  o.initial_step = get<double>(s, "dt0");
  o.seed_width = get<double>(s, "seed_width");
  o.extra_offsets = get<std::vector<double>>(s, "extra_offsets");
  return o;
}

ProblemSpec problem_from(const Json& c, double astar) {
  const Json& p = c.at("problem");
  ProblemSpec s;
  if (p.contains("a1_frac")) s.a1 = get<double>(p, "a1_frac") * astar;
  if (p.contains("a2_frac")) s.a2 = get<double>(p, "a2_frac") * astar;
  s.beta = get<double>(p, "beta");
  s.trap1 = trap_from(p, "trap1");
  s.trap2 = trap_from(p, "trap2");
  return s;
}

std::vector<std::pair<double, double>> schedule_fractions(const Json& c) {
  const Json& s = c.at("schedule");
  require(s.is_object() && s.size() == 1, "schedule needs exactly one of fractions, pairs, geometric");
  std::vector<std::pair<double, double>> out;
  if (s.contains("fractions")) {
    for (double f : get<std::vector<double>>(s, "fractions")) out.push_back({f, f});
  } else if (s.contains("pairs")) {
    for (const auto& v : get<std::vector<std::vector<double>>>(s, "pairs")) {
      require(v.size() == 2, "schedule.pairs entries must be [f1, f2]");
      out.push_back({v[0], v[1]});
    }
  } else if (s.contains("geometric")) {
    const Json& g = s["geometric"];
    const double gap = get<double>(g, "first_gap"), ratio = get<double>(g, "ratio");
    const int count = get<int>(g, "count");
    require(gap > 0.0 && gap < 1.0, "geometric.first_gap must lie in (0, 1)");
    require(ratio > 0.0 && ratio < 1.0, "geometric.ratio must lie in (0, 1)");
    require(count >= 1 && count <= 64, "geometric.count must lie in [1, 64]");
    for (int k = 0; k < count; ++k) {
      const double f = 1.0 - gap * std::pow(ratio, k);
      out.push_back({f, f});
    }
  } else {
    fail(ErrorCode::InvalidArgument, "schedule needs exactly one of fractions, pairs, geometric");
  }
  return out;
}

SweepConfig sweep_from(const Json& c, double astar) {
  SweepConfig s;
  s.mode = get<std::string>(c, "mode") == "single" ? SweepMode::Single : SweepMode::Pair;
  for (const auto& [f1, f2] : schedule_fractions(c)) s.schedule.push_back({f1 * astar, f2 * astar});
  s.problem = problem_from(c, astar);
  const Json& g = c.at("grid");
  s.grid.half_width = get<double>(g, "L");
  s.grid.points = get<int>(g, "N");
  s.grid.max_points = get<int>(g, "max_N");
  s.grid.cells_per_core = get<double>(g, "cells_per_core");
  s.grid.auto_refine = get<bool>(g, "auto_refine");
  s.solver = solver_from(c);
  s.warm_start = get<bool>(c, "warm_start");
  s.jobs = get<int>(c, "jobs");
  return s;
}

Theorem2Options theorem2_from(const Json& c, double lambda_expected) {
  const Json& d = c.at("diagnostics");
  Theorem2Options o;
  const ProblemSpec p = problem_from(c, 0.0);
  o.x1 = p.trap1.center;
  o.x2 = p.trap2.center;
  o.tolerance = get<double>(c.at("solver"), "tolerance");
  o.last = get<std::size_t>(d, "last");
  o.ratio_bound = get<double>(d, "ratio_bound");
  o.distance_bound = get<double>(d, "distance_bound");
  o.lambda_rel = get<double>(d, "lambda_rel");
  o.lambda_expected = lambda_expected;
  const auto th = get<std::vector<double>>(d, "L_thresholds");
  require(th.size() == 2, "L_thresholds must be [zero_below, infinite_above]");
  o.thresholds = {th[0], th[1]};
  return o;
}

Theorem3Options theorem3_from(const Json& c) {
  const Json& d = c.at("diagnostics");
  return {point_from(d, "x0"), get<double>(d, "drift_bound")};
}

UnboundedConfig unbounded_from(const Json& c, double astar) {
  const Json& u = c.at("unbounded");
  UnboundedConfig o;
  o.a1 = get<double>(u, "a1_frac") * astar;
  o.a2 = get<double>(u, "a2_frac") * astar;
  o.beta = get<double>(u, "beta");
  o.trap1 = trap_from(u, "trap1");
  o.trap2 = trap_from(u, "trap2");
  o.xbar1 = point_from(u, "xbar1");
  o.eta_center = point_from(u, "eta_center");
  o.eta_radius = get<double>(u, "eta_radius");
  o.R = get<double>(u, "R");
  o.C0 = get<double>(u, "C0");
  o.n = point_from(u, "n");
  o.taus = get<std::vector<double>>(u, "taus");
  return o;
}

std::vector<SameTrapConfig> trial_from(const Json& c, double astar) {
  const Json& t = c.at("trial");
  std::vector<SameTrapConfig> out;
  for (double f : get<std::vector<double>>(t, "fractions")) {
    SameTrapConfig s;
    s.a1 = s.a2 = f * astar;
    s.p = get<double>(t, "p");
    s.beta = get<double>(t, "beta");
    s.x0 = point_from(t, "x0");
    s.C0 = get<double>(t, "C0");
    s.n = point_from(t, "n");
    s.tau_R = get<double>(t, "tau_R");
    out.push_back(s);
  }
  return out;
}

std::vector<LemmaAParams> lemma_a_from(const Json& c, double astar) {
  const Json& l = c.at("lemma_a");
  std::vector<LemmaAParams> out;
  for (double kappa : get<std::vector<double>>(l, "kappa"))
    for (double m : get<std::vector<double>>(l, "m"))
      for (double p : get<std::vector<double>>(l, "p"))
        for (double f : get<std::vector<double>>(l, "a_frac")) out.push_back({kappa, m, p, f * astar, astar});
  return out;
}

}  // namespace gpelab
