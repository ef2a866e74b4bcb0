// Acceptance run: one line per criterion, nonzero exit if any fails.
// Every threshold below is fixed here; nothing is read from a config.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/trial.hpp"
#include "core/workflows.hpp"

using namespace gpelab;

namespace {

// criterion 1
constexpr double kHalvingRel = 1e-4;
constexpr double kIdentityRel = 1e-6;
constexpr double kGnRel = 1e-6;
constexpr double kAstarLiterature = 11.700896524556560;
constexpr double kAstarLiteratureRel = 1e-8;
constexpr double kC1Seconds = 10;
// criterion 2
constexpr double kHarmonicAbs = 1e-6;
constexpr double kC2Seconds = 30;
// criteria 3, 4
constexpr double kExponent = 0.5, kExponentTol = 0.05, kR2 = 0.98, kPrefactorRel = 0.10, kMultiplierRel = 0.10;
constexpr double kC3Seconds = 600;
// criteria 5, 6
constexpr double kSlackTolFactor = 10.0;
constexpr double kRatioBound = 0.5;
constexpr double kDistanceBound = 0.05, kLambdaRel = 0.10;
constexpr double kSandwichK = 0.1;
constexpr double kC5Seconds = 1800;
// criterion 7
constexpr double kDriftBound = 10.0;
constexpr double kC7Seconds = 1800;
// criterion 8
constexpr double kUnboundedFinal = -0.05 * 40.0 * 40.0 * 0.1 * 0.5;
// criterion 9
constexpr double kTrialRatioBound = 5.0;
// criterion 10
constexpr double kNewtonRel = 1e-6;
constexpr double kC10Seconds = 5;

const RadialProfile& Q() { return reference_profile(); }

// blow-up length (a* - a)^{1/(p+2)}
double oracle_eps(double a, double p) { return std::pow(Q().mass() - a, 1.0 / (p + 2.0)); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// m_p = 2 pi int r^{p+1} Q^2 dr by trapezoid on the stored table, tail ignored
double oracle_moment(double p) {
  const auto& r = Q().radii();
  const auto& q = Q().q_values();
  double s = 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double a = std::pow(r[k - 1], p + 1) * q[k - 1] * q[k - 1];
    const double b = std::pow(r[k], p + 1) * q[k] * q[k];
    s += 0.5 * (a + b) * (r[k] - r[k - 1]);
  }
  return 2.0 * M_PI * s;
}

double oracle_lambda(double p) { return std::pow(0.5 * p * oracle_moment(p), 1.0 / (p + 2.0)); }

// ordinary least squares of ln y on ln x
struct Ols {
  double slope = 0, intercept = 0, r2 = 0;
};
Ols ols_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a, sy += b, sxx += a * a, sxy += a * b, syy += b * b;
  }
  Ols o;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  o.slope = cxy / vx;
  o.intercept = (sy - o.slope * sx) / n;
  o.r2 = cxy * cxy / (vx * vy);
  return o;
}

const std::string& output_file(const CommandOutput& o, const std::string& name) {
  for (const auto& [n, c] : o.files)
    if (n == name) return c;
  fail(ErrorCode::Io, "missing output " + name);
}

struct SweepRun {
  CommandOutput out;
  std::vector<SweepRecord> records;
  double seconds = 0;
  Json config;
};

SweepRun run_sweep_preset(const std::string& preset) {
  SweepRun s;
  s.config = resolve_config("sweep", Json{{"preset", preset}});
  const auto t0 = std::chrono::steady_clock::now();
  s.out = run_command("sweep", s.config, Q());
  s.seconds = seconds_since(t0);
  s.records = sweep_records(Table::from_csv(output_file(s.out, "sweep.csv")));
  return s;
}

bool all_converged(const std::vector<SweepRecord>& recs, Outcome& o) {
  bool ok = !recs.empty();
  for (const auto& r : recs) ok = ok && r.ok;
  o.expect(ok, "every sweep point converged");
  return ok;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  TownesOptions opt;
  const RadialProfile q = solve_townes(opt);
  opt.step *= 0.5;
  const RadialProfile q2 = solve_townes(opt);
  const double halving = std::abs(q2.mass() / q.mass() - 1.0);
  const double id_k = std::abs(q.kinetic() / q.mass() - 1.0);
  const double id_q = std::abs(q.quartic() / (2.0 * q.mass()) - 1.0);
  const double J = gn_quotient(sample_to_grid(q, Grid2D(12.0, 256), 1.0));
  const double gn = std::abs(J - 0.5 * q.mass()) / (0.5 * q.mass());
  const double lit = std::abs(q.mass() / kAstarLiterature - 1.0);
  const double t = seconds_since(t0);
  o.expect(halving < kHalvingRel, "step halving");
  o.expect(id_k < kIdentityRel && id_q < kIdentityRel, "identities");
  o.expect(gn < kGnRel, "GN equality on grid");
  o.expect(lit < kAstarLiteratureRel, "a* vs 11.700896524556560");
  o.expect(t < kC1Seconds, "runtime");
  o.note("a*=" + fmt("%.12f", q.mass()) + " halving=" + fmt("%.1e", halving) + " id=" + fmt("%.1e", std::max(id_k, id_q)) +
         " gn=" + fmt("%.1e", gn) + " t=" + fmt("%.1fs", t));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  MinimizeOptions opt;
  opt.tolerance = 1e-8;
  const SolveResult r = minimize_single(0.0, TrapSpec{{0, 0}, 2.0}, Grid2D(8.0, 128), opt);
  const double t = seconds_since(t0);
  o.expect(r.converged, "converged");
  o.expect(std::abs(r.energy - 2.0) < kHarmonicAbs, "e = 2");
  o.expect(std::abs(r.mu[0] - 2.0) < kHarmonicAbs, "mu = 2");
  o.expect(t < kC2Seconds, "runtime");
  o.note("e=" + fmt("%.10f", r.energy) + " mu=" + fmt("%.10f", r.mu[0]) + " t=" + fmt("%.1fs", t));
  return o;
}

void criteria3and4(Outcome& c3, Outcome& c4) {
  const SweepRun s = run_sweep_preset("scaling");
  if (!all_converged(s.records, c3)) {
    c4.expect(false, "sweep converged");
    return;
  }
  const double astar = Q().mass();
  const double lambda = oracle_lambda(2.0);
  std::vector<double> gap, e;
  for (const auto& r : s.records) gap.push_back(astar - r.a1), e.push_back(r.e1);
  const Ols f = ols_loglog(gap, e);
  const double target = 2.0 / astar * lambda * lambda;
  const SweepRecord& fin = s.records.back();
  const double pref_final = fin.e1 / std::sqrt(astar - fin.a1);
  c3.expect(std::abs(f.slope - kExponent) <= kExponentTol, "exponent");
  c3.expect(f.r2 >= kR2, "r^2");
  c3.expect(std::abs(pref_final / target - 1.0) <= kPrefactorRel, "prefactor at 0.995 a*");
  c3.expect(s.seconds < kC3Seconds, "runtime");
  c3.note("exponent=" + fmt("%.4f", f.slope) + " r2=" + fmt("%.6f", f.r2) + " prefactor(0.995)=" + fmt("%.4f", pref_final) +
          " fitted=" + fmt("%.4f", std::exp(f.intercept)) + " target=" + fmt("%.4f", target) + " t=" + fmt("%.0fs", s.seconds));

  const double eps = oracle_eps(fin.a1, 2.0);
  const double m = eps * eps * fin.mu1;
  c4.expect(std::abs(m / (-lambda * lambda) - 1.0) <= kMultiplierRel, "eps^2 mu");
  c4.note("eps^2 mu=" + fmt("%.4f", m) + " target=" + fmt("%.4f", -lambda * lambda));
}

void criteria5_6_11(Outcome& c5, Outcome& c6, Outcome& c11) {
  const SweepRun s = run_sweep_preset("theorem2");
  const double tol = s.config["solver"]["tolerance"].get<double>();
  const double lambda = oracle_lambda(2.0);
  const Point x1{-1, 0};
  if (all_converged(s.records, c5)) {
    bool slack = true, single = true;
    double worst_slack = HUGE_VAL;
    std::vector<double> ratio;
    for (const auto& r : s.records) {
      const double sl = r.e - r.e1 - r.e2 - r.beta * r.overlap;
      worst_slack = std::min(worst_slack, sl);
      slack = slack && sl >= -kSlackTolFactor * tol;
      single = single && r.peak_count1 == 1 && r.peak_count2 == 1;
      ratio.push_back(distance(r.peak1, x1) / oracle_eps(r.a1, r.p1));
    }
    const std::size_t n = ratio.size();
    const bool decreasing = n >= 3 && ratio[n - 2] < ratio[n - 3] && ratio[n - 1] < ratio[n - 2];
    const SweepRecord& fin = s.records.back();
    c5.expect(slack, "lower bound e >= e1 + e2 + beta overlap");
    c5.expect(ratio.back() < kRatioBound, "peak ratio below 0.5");
    c5.expect(decreasing, "peak ratio decreasing over last 3");
    c5.expect(fin.profile_dist1 < kDistanceBound, "H1 distance");
    c5.expect(std::abs(fin.lambda_fit1 / lambda - 1.0) < kLambdaRel, "lambda_fit");
    c5.expect(single, "one peak per component");
    c5.expect(s.seconds < kC5Seconds, "runtime");
    c5.note("min slack=" + fmt("%.2e", worst_slack) + " ratios=" + fmt("%.2e", ratio[n - 3]) + "," +
            fmt("%.2e", ratio[n - 2]) + "," + fmt("%.2e", ratio[n - 1]) + " H1=" + fmt("%.4f", fin.profile_dist1) +
            " lambda_fit=" + fmt("%.4f", fin.lambda_fit1) + " t=" + fmt("%.0fs", s.seconds));

    double lo = HUGE_VAL, hi = 0;
    for (const auto& r : s.records)
      for (double v : {std::pow(oracle_eps(r.a1, r.p1), 2) * r.quartic1, std::pow(oracle_eps(r.a2, r.p2), 2) * r.quartic2})
        lo = std::min(lo, v), hi = std::max(hi, v);
    const double K = std::min(lo, 1.0 / hi);
    c6.expect(K >= kSandwichK, "K >= 0.1");
    c6.note("eps^2 int u^4 in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] K=" + fmt("%.4f", K));
  } else {
    c6.expect(false, "sweep converged");
  }

  const Json manifest = Json::parse(output_file(s.out, "manifest.json"));
  const CommandOutput again = run_command("sweep", manifest.at("config"), Q());
  const bool same = output_file(again, "sweep.csv") == output_file(s.out, "sweep.csv");
  const CommandOutput rep = run_report(output_file(again, "sweep.csv"), output_file(s.out, "manifest.json"), Q());
  c11.expect(same, "sweep.csv byte-identical");
  c11.expect(rep.summary["hash_ok"] == true, "manifest hash");
  c11.note("fnv1a=" + fnv1a_hex(output_file(again, "sweep.csv")));
}

Outcome criterion7() {
  Outcome o;
  const SweepRun s = run_sweep_preset("theorem3");
  if (!all_converged(s.records, o)) return o;
  std::vector<double> s1, s2;
  double drift = 0;
  const Point x0{0, 0};
  for (const auto& r : s.records) {
    const double sep = distance(r.peak1, r.peak2);
    const double et1 = 1.0 / std::sqrt(r.quartic1), et2 = 1.0 / std::sqrt(r.quartic2);
    s1.push_back(sep / et1);
    s2.push_back(sep / et2);
    drift = std::max(drift, distance(r.peak1, x0) / (et1 * std::abs(std::log(et1))));
    drift = std::max(drift, distance(r.peak2, x0) / (et2 * std::abs(std::log(et2))));
  }
  bool inc = true;
  for (std::size_t k = 1; k < s1.size(); ++k) inc = inc && s1[k] > s1[k - 1] && s2[k] > s2[k - 1];
  o.expect(inc, "separation / eps_tilde strictly increasing");
  o.expect(drift <= kDriftBound, "drift");
  o.expect(s.seconds < kC7Seconds, "runtime");
  std::string seps;
  for (double v : s1) seps += fmt("%.3f ", v);
  o.note("sep/eps_tilde=" + seps + "max drift=" + fmt("%.2f", drift) + " t=" + fmt("%.0fs", s.seconds));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const Json cfg = resolve_config("unbounded", Json::object());
  const CommandOutput out = run_command("unbounded", cfg, Q());
  const Table t = Table::from_csv(output_file(out, "unbounded.csv"));
  const auto tau = t.column("tau");
  const auto e = t.column("energy");
  o.expect(tau == std::vector<double>({10.0, 20.0, 40.0}), "tau ladder 10, 20, 40 fully resolved");
  bool dec = e.size() == 3;
  for (std::size_t k = 1; k < e.size(); ++k) dec = dec && e[k] < e[k - 1];
  o.expect(dec, "strictly decreasing");
  o.expect(!e.empty() && e.back() < kUnboundedFinal, "final energy below -4");
  std::string es;
  for (double v : e) es += fmt("%.4g ", v);
  o.note("E=" + es);
  return o;
}

Outcome criterion9() {
  Outcome o;
  const Json cfg = resolve_config("trial", Json{{"compare", true}});
  const CommandOutput out = run_command("trial", cfg, Q());
  const Table t = Table::from_csv(output_file(out, "trial.csv"));
  const auto ratio = t.column("ratio");
  const auto bound = t.column("energy");
  const auto e = t.column("e_measured");
  o.expect(t.column("a_frac") == std::vector<double>({0.97, 0.98, 0.99, 0.995}), "schedule");
  double worst = 0;
  bool above = true;
  for (std::size_t k = 0; k < ratio.size(); ++k) {
    worst = std::max(worst, ratio[k]);
    above = above && std::isfinite(e[k]) && bound[k] >= e[k];
  }
  o.expect(worst < kTrialRatioBound, "ratio bounded by 5");
  o.expect(above, "trial energy >= measured minimum");
  std::string s;
  for (std::size_t k = 0; k < ratio.size(); ++k) s += fmt("%.3f", ratio[k]) + "(" + fmt("%.4f", bound[k] - e[k]) + ") ";
  o.note("ratio(bound - e)=" + s);
  return o;
}

// f evaluated here, not through the library
double oracle_f(const LemmaAParams& q, double s) {
  return (q.astar - q.a) / q.kappa * s * s + q.m * std::pow(std::log(s) / s, q.p);
}

double oracle_argmin(const LemmaAParams& q) {
  const int n = 200000;
  const double l0 = 3.0, l1 = std::log(1e14);
  int best = 0;
  double fb = oracle_f(q, std::exp(l0));
  for (int i = 1; i <= n; ++i) {
    const double f = oracle_f(q, std::exp(l0 + (l1 - l0) * i / n));
    if (f < fb) fb = f, best = i;
  }
  double a = std::exp(l0 + (l1 - l0) * std::max(best - 1, 0) / n);
  double b = std::exp(l0 + (l1 - l0) * std::min(best + 1, n) / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 0; k < 300 && b - a > 1e-15 * b; ++k) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (oracle_f(q, c) < oracle_f(q, d))
      b = d;
    else
      a = c;
  }
  return 0.5 * (a + b);
}

Outcome criterion10() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double astar = Q().mass();
  double worst = 0;
  bool bracket = true, increasing = true;
  int rows = 0;
  for (double kappa : {1e4, 1e5, 1e6})
    for (double p : {1.0, 2.0, 3.0})
      for (double f : {0.99, 0.999}) {
        double prev = -HUGE_VAL;
        for (double m : {10.0, 100.0, 1000.0}) {
          const LemmaAParams q{kappa, m, p, f * astar, astar};
          const LemmaAResult r = lemma_a_minimize(q);
          worst = std::max(worst, std::abs(r.s1 / oracle_argmin(q) - 1.0));
          bracket = bracket && r.bracket_holds && r.bracket_lower <= r.s1 && r.s1 <= r.bracket_upper;
          increasing = increasing && r.bound_ratio > prev && r.bound_ratio > 0;
          prev = r.bound_ratio;
          ++rows;
        }
      }
  const double t = seconds_since(t0);
  o.expect(rows == 54, "54 parameter points");
  o.expect(worst <= kNewtonRel, "Newton vs brute force");
  o.expect(bracket, "bracket");
  o.expect(increasing, "bound ratio increasing in m");
  o.expect(t < kC10Seconds, "runtime");
  o.note("max rel diff=" + fmt("%.1e", worst) + " t=" + fmt("%.1fs", t));
  return o;
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    Outcome o;
    o.expect(false, std::string("exception: ") + e.what());
    return o;
  }
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;
  auto report = [&](const std::string& name, const Outcome& o) {
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    results.push_back({name, o});
  };
  report("1 Townes constants", guarded(criterion1));
  report("2 harmonic oracle", guarded(criterion2));
  Outcome c3, c4;
  try {
    criteria3and4(c3, c4);
  } catch (const std::exception& e) {
    c3.expect(false, e.what());
    c4.expect(false, e.what());
  }
  report("3 single-component energy scaling", c3);
  report("4 multiplier limit", c4);
  Outcome c5, c6, c11;
  try {
    criteria5_6_11(c5, c6, c11);
  } catch (const std::exception& e) {
    for (Outcome* o : {&c5, &c6, &c11}) o->expect(false, e.what());
  }
  report("5 separated traps", c5);
  report("6 quartic sandwich", c6);
  report("7 same trap", guarded(criterion7));
  report("8 nonexistence above a*", guarded(criterion8));
  report("9 same-trap upper bound", guarded(criterion9));
  report("10 Lemma A oracle", guarded(criterion10));
  report("11 determinism", c11);
  int failed = 0;
  for (const auto& [n, o] : results) failed += !o.pass;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
