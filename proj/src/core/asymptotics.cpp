#include "core/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <thread>

#include "core/error.hpp"

namespace gpelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int wrap(int i, int n) { return (i % n + n) % n; }

}  // namespace

Peak find_peak(const ScalarField& field) {
  const Grid2D& g = field.grid();
  const int n = g.points_per_side();
  const auto v = field.values();
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  const double vmax = v[best];
  if (!(vmax > 0.0) || !std::isfinite(vmax)) fail(ErrorCode::ZeroField, "field has no positive maximum");

  const int ix = static_cast<int>(best / n), iy = static_cast<int>(best % n);
  Peak pk;
  pk.location = g.point(ix, iy);
  pk.value = vmax;

  auto at = [&](int dx, int dy) { return field.at(wrap(ix + dx, n), wrap(iy + dy, n)); };
  double l[3][3];
  bool positive = true;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const double s = at(a, b);
      if (!(s > 0.0)) positive = false;
      l[a + 1][b + 1] = positive ? std::log(s) : 0.0;
    }
  if (positive) {
    const double gx = 0.5 * (l[2][1] - l[0][1]);
    const double gy = 0.5 * (l[1][2] - l[1][0]);
    const double hxx = l[2][1] - 2.0 * l[1][1] + l[0][1];
    const double hyy = l[1][2] - 2.0 * l[1][1] + l[1][0];
    const double hxy = 0.25 * (l[2][2] - l[2][0] - l[0][2] + l[0][0]);
    const double det = hxx * hyy - hxy * hxy;
    if (hxx < 0.0 && det > 1e-14 * (hxx * hxx + hyy * hyy)) {
      const double dx = -(hyy * gx - hxy * gy) / det;
      const double dy = -(hxx * gy - hxy * gx) / det;
      if (std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0) {
        const double h = g.spacing();
        pk.location = {pk.location.x + h * dx, pk.location.y + h * dy};
        pk.value = std::exp(l[1][1] + gx * dx + gy * dy +
                            0.5 * (hxx * dx * dx + 2.0 * hxy * dx * dy + hyy * dy * dy));
        pk.refined = true;
      }
    }
  }

  const double floor = 0.5 * vmax;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c = field.at(i, j);
      if (c <= floor) continue;
      bool strict = true;
      for (int a = -1; a <= 1 && strict; ++a)
        for (int b = -1; b <= 1; ++b) {
          if (a == 0 && b == 0) continue;
          if (field.at(wrap(i + a, n), wrap(j + b, n)) >= c) {
            strict = false;
            break;
          }
        }
      if (strict) ++pk.count;
    }
  // a flat top still counts as one maximum
  if (pk.count == 0) pk.count = 1;
  return pk;
}

ProfileFit rescaled_profile_distance(const ScalarField& field, double eps, Point peak,
                                     const RadialProfile& profile) {
  require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
  const Grid2D& g = field.grid();
  if (2.0 * eps / g.spacing() < 8.0)
    fail(ErrorCode::UnderResolved, "fewer than 8 cells across the rescaled core");
  const double astar = profile.mass();
  const int n = g.points_per_side();

  std::vector<double> radius(field.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) radius[g.index(i, j)] = distance(g.point(i, j), peak) / eps;

  auto target = [&](double lambda, ScalarField& out) {
    const double amp = lambda / (std::sqrt(astar) * eps);
    auto o = out.values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = amp * profile.value(lambda * radius[k]);
  };
  ScalarField t(g);
  const auto u = field.values();
  const double h2 = g.spacing() * g.spacing();
  auto l2 = [&](double lambda) {
    target(lambda, t);
    const auto tv = t.values();
    double s = 0.0;
    for (std::size_t k = 0; k < tv.size(); ++k) s += (u[k] - tv[k]) * (u[k] - tv[k]);
    return s * h2;
  };

  // coarse log scan, then golden section in ln(lambda)
  const int scan = 41;
  const double lo = std::log(0.1), hi = std::log(10.0);
  std::vector<double> f(scan);
  int kbest = 0;
  for (int k = 0; k < scan; ++k) {
    f[k] = l2(std::exp(lo + (hi - lo) * k / (scan - 1)));
    if (f[k] < f[kbest]) kbest = k;
  }
  double a = lo + (hi - lo) * std::max(kbest - 1, 0) / (scan - 1);
  double b = lo + (hi - lo) * std::min(kbest + 1, scan - 1) / (scan - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = l2(std::exp(c)), fd = l2(std::exp(d));
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = l2(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = l2(std::exp(d));
    }
  }
  ProfileFit fit;
  fit.lambda = std::exp(0.5 * (a + b));
  target(fit.lambda, t);
  ScalarField diff(g);
  auto dv = diff.values();
  const auto tv = t.values();
  for (std::size_t k = 0; k < dv.size(); ++k) dv[k] = u[k] - tv[k];
  const double l2sq = integrate_power(diff, 2);
  fit.l2_distance = std::sqrt(l2sq);
  fit.distance = std::sqrt(l2sq + eps * eps * gradient_sq_integral(diff));
  return fit;
}

double decay_rate(const ScalarField& field, Point peak, double eps) {
  require(eps > 0.0, "eps must be positive");
  const Grid2D& g = field.grid();
  const double vmax = field.max_value();
  if (!(vmax > 0.0)) fail(ErrorCode::ZeroField, "field has no positive maximum");
  const int n = g.points_per_side();
  // stay above the unconverged far-field floor
  const double lower = std::max(1e-10, 10.0 * boundary_ratio(field));
  double sr = 0, sl = 0, srr = 0, srl = 0, rmin = 1e300, rmax = 0;
  std::size_t m = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = field.at(i, j) / vmax;
      if (v < lower || v > 1e-3) continue;
      const double r = distance(g.point(i, j), peak);
      const double lv = std::log(v);
      sr += r;
      sl += lv;
      srr += r * r;
      srl += r * lv;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      ++m;
    }
  if (m < 20 || rmax - rmin < 4.0 * g.spacing())
    fail(ErrorCode::TailUnresolved, "decay window has too few samples");
  const double mm = static_cast<double>(m);
  const double slope = (mm * srl - sr * sl) / (mm * srr - sr * sr);
  if (!(slope < 0.0)) fail(ErrorCode::TailUnresolved, "field does not decay in the fit window");
  return -slope * eps;
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::size_t window, double r2_gate) {
  if (xs.size() != ys.size()) fail(ErrorCode::DegenerateInput, "xs and ys differ in length");
  const std::size_t count = window == 0 ? xs.size() : std::min(window, xs.size());
  if (count < 3) fail(ErrorCode::DegenerateInput, "power-law fit needs at least 3 points");
  const std::size_t first = xs.size() - count;
  std::vector<double> lx, ly;
  for (std::size_t k = first; k < xs.size(); ++k) {
    if (!(xs[k] > 0.0) || !(ys[k] > 0.0) || !std::isfinite(xs[k]) || !std::isfinite(ys[k]))
      fail(ErrorCode::DegenerateInput, "power-law fit needs positive finite data");
    lx.push_back(std::log(xs[k]));
    ly.push_back(std::log(ys[k]));
  }
  const double n = static_cast<double>(count);
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < count; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < count; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::DegenerateInput, "all x values coincide");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  double ssr = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double r = ly[k] - fit.log_prefactor - fit.exponent * lx[k];
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  fit.first = first;
  fit.count = count;
  fit.accepted = fit.r_squared >= r2_gate;
  return fit;
}

void derive_columns(SweepRecord& r, double astar) {
  r.eps1 = r.a1 < astar ? std::pow(astar - r.a1, 1.0 / (r.p1 + 2.0)) : kNaN;
  r.eps2 = r.a2 < astar ? std::pow(astar - r.a2, 1.0 / (r.p2 + 2.0)) : kNaN;
  r.eps_tilde1 = 1.0 / std::sqrt(r.quartic1);
  r.eps_tilde2 = 1.0 / std::sqrt(r.quartic2);
  r.sandwich_slack = r.e - r.e1 - r.e2 - r.beta * r.overlap;
}

GridChoice choose_grid(const GridPolicy& policy, double a1, double a2, double p1, double p2,
                       SweepMode mode, const RadialProfile& profile) {
  const double astar = profile.mass();
  double width = std::pow(astar - a1, 1.0 / (p1 + 2.0)) / lambda_of(profile, p1);
  if (mode == SweepMode::Pair)
    width = std::min(width, std::pow(astar - a2, 1.0 / (p2 + 2.0)) / lambda_of(profile, p2));
  GridChoice c{policy.half_width, policy.points, false};
  auto spacing = [&](int N) { return 2.0 * policy.half_width / N; };
  while (policy.auto_refine && spacing(c.points) * policy.cells_per_core > width &&
         2 * c.points <= policy.max_points)
    c.points *= 2;
  c.under_resolved = spacing(c.points) * policy.cells_per_core > width;
  return c;
}

namespace {

void validate(const SweepConfig& c, double astar) {
  require(!c.schedule.empty(), "schedule is empty");
  const bool pair = c.mode == SweepMode::Pair;
  for (std::size_t k = 0; k < c.schedule.size(); ++k) {
    const auto [a1, a2] = c.schedule[k];
    require(std::isfinite(a1) && a1 >= 0.0 && a1 < astar, "schedule couplings must lie in [0, a*)");
    if (pair)
      require(std::isfinite(a2) && a2 >= 0.0 && a2 < astar, "schedule couplings must lie in [0, a*)");
    if (k == 0) continue;
    const auto [b1, b2] = c.schedule[k - 1];
    if (pair)
      require(a1 >= b1 && a2 >= b2 && (a1 > b1 || a2 > b2), "schedule must increase toward a*");
    else
      require(a1 > b1, "schedule must increase toward a*");
  }
  require(c.problem.beta >= 0.0, "beta must be >= 0");
  require(c.problem.trap1.p > 0.0 && c.problem.trap2.p > 0.0, "trap exponents must be positive");
  require(c.grid.half_width > 0.0, "grid half width must be positive");
  require(c.grid.points >= 32 && c.grid.points % 2 == 0, "grid points must be even and >= 32");
  require(c.grid.max_points >= c.grid.points, "max_points below points");
  require(c.grid.cells_per_core > 0.0, "cells_per_core must be positive");
  require(c.jobs >= 1, "jobs must be >= 1");
}

struct Chain {
  std::optional<std::vector<ScalarField>> single1, single2, pair;
};

int severity(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return 0;
    case SolveStatus::NotConverged: return 1;
    case SolveStatus::CollapseDetected: return 2;
  }
  return 2;
}

void analyse(const ScalarField& u, double eps, const RadialProfile& profile, Point& peak, int& count,
             bool& refined, double& lambda_fit, double& dist, double& delta) {
  const Peak pk = find_peak(u);
  peak = pk.location;
  count = pk.count;
  refined = pk.refined;
  lambda_fit = dist = delta = kNaN;
  if (!(eps > 0.0)) return;
  try {
    const ProfileFit f = rescaled_profile_distance(u, eps, peak, profile);
    lambda_fit = f.lambda;
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

MinimizeOptions warm(const MinimizeOptions& base, const std::optional<std::vector<ScalarField>>& prev,
                     const Grid2D& grid) {
  MinimizeOptions o = base;
  if (prev && !prev->empty() && prev->front().grid().same_as(grid)) o.initial = *prev;
  return o;
}

SweepRecord solve_point(const SweepConfig& c, std::size_t k, const RadialProfile& profile,
                        std::map<int, Grid2D>& grids, Chain* chain) {
  const double astar = profile.mass();
  const bool pair = c.mode == SweepMode::Pair;
  SweepRecord r;
  r.index = static_cast<int>(k);
  r.a1 = c.schedule[k].first;
  r.a2 = pair ? c.schedule[k].second : kNaN;
  r.beta = pair ? c.problem.beta : kNaN;
  r.p1 = c.problem.trap1.p;
  r.p2 = pair ? c.problem.trap2.p : kNaN;
  const GridChoice gc = choose_grid(c.grid, r.a1, pair ? r.a2 : 0.0, r.p1, pair ? r.p2 : 2.0,
                                    c.mode, profile);
  r.half_width = gc.half_width;
  r.points = gc.points;
  r.under_resolved = gc.under_resolved;
  auto it = grids.find(gc.points);
  if (it == grids.end()) it = grids.emplace(gc.points, Grid2D(gc.half_width, gc.points)).first;
  const Grid2D& grid = it->second;

  static const std::optional<std::vector<ScalarField>> none;
  auto prev = [&](std::optional<std::vector<ScalarField>> Chain::*m) -> const auto& {
    return chain ? chain->*m : none;
  };

  try {
    const SolveResult s1 = minimize_single(r.a1, c.problem.trap1, grid, warm(c.solver, prev(&Chain::single1), grid));
    if (!pair) {
      r.status = status_name(s1.status);
      r.ok = s1.converged;
      r.iterations = s1.iterations;
      r.residual = s1.residual;
      r.e = r.E1 = r.e1 = s1.energy;
      r.mu1 = s1.mu[0];
      r.quartic1 = s1.quartic[0];
      r.e2 = r.E2 = r.mu2 = r.quartic2 = r.overlap = kNaN;
      r.peak2 = {kNaN, kNaN};
      r.lambda_fit2 = r.profile_dist2 = r.delta2 = kNaN;
      derive_columns(r, astar);
      analyse(s1.fields[0], r.eps1, profile, r.peak1, r.peak_count1, r.peak_refined1, r.lambda_fit1,
              r.profile_dist1, r.delta1);
      if (chain) chain->single1 = s1.fields;
      return r;
    }
    const SolveResult s2 = minimize_single(r.a2, c.problem.trap2, grid, warm(c.solver, prev(&Chain::single2), grid));
    ProblemSpec spec = c.problem;
    spec.a1 = r.a1;
    spec.a2 = r.a2;
    const SolveResult sp = minimize_pair(spec, grid, warm(c.solver, prev(&Chain::pair), grid));
    const SolveStatus worst = std::max({s1.status, s2.status, sp.status},
                                       [](SolveStatus x, SolveStatus y) { return severity(x) < severity(y); });
    r.status = status_name(worst);
    r.ok = worst == SolveStatus::Converged;
    r.iterations = sp.iterations;
    r.residual = std::max({s1.residual, s2.residual, sp.residual});
    r.e = sp.energy;
    r.E1 = sp.component_energy[0];
    r.E2 = sp.component_energy[1];
    r.e1 = s1.energy;
    r.e2 = s2.energy;
    r.overlap = sp.interaction;
    r.mu1 = sp.mu[0];
    r.mu2 = sp.mu[1];
    r.quartic1 = sp.quartic[0];
    r.quartic2 = sp.quartic[1];
    derive_columns(r, astar);
    analyse(sp.fields[0], r.eps1, profile, r.peak1, r.peak_count1, r.peak_refined1, r.lambda_fit1,
            r.profile_dist1, r.delta1);
    analyse(sp.fields[1], r.eps2, profile, r.peak2, r.peak_count2, r.peak_refined2, r.lambda_fit2,
            r.profile_dist2, r.delta2);
    if (chain) {
      chain->single1 = s1.fields;
      chain->single2 = s2.fields;
      chain->pair = sp.fields;
    }
  } catch (const Error& e) {
    r.status = error_code_name(e.code());
    r.ok = false;
    if (chain) *chain = Chain{};
  }
  return r;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& config, const RadialProfile& profile) {
  const double astar = profile.mass();
  validate(config, astar);
  const std::size_t n = config.schedule.size();
  std::vector<SweepRecord> out(n);
  if (config.warm_start || config.jobs == 1) {
    std::map<int, Grid2D> grids;
    Chain chain;
    for (std::size_t k = 0; k < n; ++k)
      out[k] = solve_point(config, k, profile, grids, config.warm_start ? &chain : nullptr);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::map<int, Grid2D> grids;
    for (std::size_t k = next++; k < n; k = next++) out[k] = solve_point(config, k, profile, grids, nullptr);
  };
  std::vector<std::thread> pool;
  const int jobs = std::min<int>(config.jobs, static_cast<int>(n));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

const char* regime_name(LRegime r) noexcept {
  switch (r) {
    case LRegime::Zero: return "zero";
    case LRegime::Finite: return "finite";
    case LRegime::Infinite: return "infinite";
  }
  return "unknown";
}

LClassification classify_L(const std::vector<SweepRecord>& records, double delta0,
                           const LThresholds& thresholds) {
  std::vector<double> lv;
  for (const auto& r : records)
    if (r.ok) lv.push_back(-delta0 / r.eps1 - r.p2 * std::log(r.eps2));
  if (lv.size() < 3) fail(ErrorCode::InsufficientPoints, "classification needs at least 3 points");
  LClassification c;
  for (double v : lv) c.values.push_back(std::exp(v));
  const std::size_t m = lv.size();
  const double d1 = lv[m - 2] - lv[m - 3], d2 = lv[m - 1] - lv[m - 2];
  c.trend = std::exp(lv[m - 1] - lv[m - 3]);
  if (d1 < 0.0 && d2 < 0.0 && c.trend < thresholds.zero_below)
    c.regime = LRegime::Zero;
  else if (d1 > 0.0 && d2 > 0.0 && c.trend > thresholds.infinite_above)
    c.regime = LRegime::Infinite;
  else
    c.regime = LRegime::Finite;
  c.infinite = c.regime == LRegime::Infinite;
  c.estimate = c.values.back();
  return c;
}

Sandwich l4_sandwich(const std::vector<SweepRecord>& records) {
  Sandwich s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  bool any = false;
  for (const auto& r : records) {
    if (!r.ok) continue;
    for (double v : {r.eps1 * r.eps1 * r.quartic1, r.eps2 * r.eps2 * r.quartic2}) {
      if (!std::isfinite(v)) continue;
      s.lo = std::min(s.lo, v);
      s.hi = std::max(s.hi, v);
      any = true;
    }
  }
  if (!any) fail(ErrorCode::InsufficientPoints, "no usable sweep points");
  s.K = std::min(s.lo, 1.0 / s.hi);
  return s;
}

namespace {

bool strictly_decreasing_tail(const std::vector<double>& v, std::size_t last) {
  if (v.size() < last || last < 2) return false;
  for (std::size_t k = v.size() - last + 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace

Theorem2Report theorem2_diagnostics(const std::vector<SweepRecord>& records,
                                    const Theorem2Options& o) {
  Theorem2Report rep;
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records) {
    if (r.ok)
      ok.push_back(&r);
    else
      rep.failures.push_back("point " + std::to_string(r.index) + " failed: " + r.status);
  }
  if (ok.empty()) {
    rep.failures.push_back("no converged points");
    return rep;
  }
  std::vector<double> r1, r2;
  rep.sandwich_ok = true;
  rep.single_peak = true;
  for (const SweepRecord* r : ok) {
    Theorem2Row row;
    row.ratio1 = distance(r->peak1, o.x1) / r->eps1;
    row.ratio2 = distance(r->peak2, o.x2) / r->eps2;
    row.slack = r->sandwich_slack;
    row.sandwich_ok = row.slack >= -10.0 * o.tolerance;
    rep.sandwich_ok = rep.sandwich_ok && row.sandwich_ok;
    rep.single_peak = rep.single_peak && r->peak_count1 == 1 && r->peak_count2 == 1;
    r1.push_back(row.ratio1);
    r2.push_back(row.ratio2);
    rep.rows.push_back(row);
  }
  rep.ratio1_decreasing = strictly_decreasing_tail(r1, o.last);
  rep.ratio1_small = r1.back() < o.ratio_bound;

  const SweepRecord& fin = *ok.back();
  double delta = std::min(fin.delta1, fin.delta2);
  if (!std::isfinite(delta)) delta = std::min(fin.lambda_fit1, fin.lambda_fit2);
  rep.delta0 = delta * distance(o.x1, o.x2);
  try {
    rep.L = classify_L(records, rep.delta0, o.thresholds);
    if (rep.L.regime == LRegime::Zero) {
      rep.component2_checked = true;
      rep.ratio2_decreasing = strictly_decreasing_tail(r2, o.last);
      rep.ratio2_small = r2.back() < o.ratio_bound;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientPoints) throw;
  }

  double dist = fin.profile_dist1;
  if (rep.component2_checked) dist = std::max(dist, fin.profile_dist2);
  rep.distance_ok = dist < o.distance_bound;
  if (o.lambda_expected > 0.0) {
    auto close = [&](double l) { return std::abs(l / o.lambda_expected - 1.0) < o.lambda_rel; };
    rep.lambda_ok = close(fin.lambda_fit1) && (!rep.component2_checked || close(fin.lambda_fit2));
  }

  if (!rep.sandwich_ok) rep.failures.push_back("lower energy bound violated");
  if (!rep.ratio1_decreasing) rep.failures.push_back("component-1 peak ratio not decreasing");
  if (!rep.ratio1_small) rep.failures.push_back("component-1 peak ratio above bound");
  if (!rep.ratio2_decreasing) rep.failures.push_back("component-2 peak ratio not decreasing");
  if (!rep.ratio2_small) rep.failures.push_back("component-2 peak ratio above bound");
  if (!rep.distance_ok) rep.failures.push_back("profile distance above bound");
  if (!rep.lambda_ok) rep.failures.push_back("fitted lambda off target");
  if (!rep.single_peak) rep.failures.push_back("more than one peak");
  rep.passed = rep.failures.empty();
  return rep;
}

Theorem3Report theorem3_diagnostics(const std::vector<SweepRecord>& records,
                                    const Theorem3Options& o) {
  Theorem3Report rep;
  rep.applicable = !records.empty();
  for (const auto& r : records) {
    if (!(r.beta > 0.0)) rep.applicable = false;
    if (!r.ok) rep.failures.push_back("point " + std::to_string(r.index) + " failed: " + r.status);
  }
  std::vector<double> s1, s2;
  for (const auto& r : records) {
    if (!r.ok) continue;
    Theorem3Row row;
    const double sep = distance(r.peak1, r.peak2);
    row.sep1 = sep / r.eps_tilde1;
    row.sep2 = sep / r.eps_tilde2;
    row.drift1 = distance(r.peak1, o.x0) / (r.eps_tilde1 * std::abs(std::log(r.eps_tilde1)));
    row.drift2 = distance(r.peak2, o.x0) / (r.eps_tilde2 * std::abs(std::log(r.eps_tilde2)));
    rep.drift_max = std::max({rep.drift_max, row.drift1, row.drift2});
    s1.push_back(row.sep1);
    s2.push_back(row.sep2);
    rep.rows.push_back(row);
  }
  auto increasing = [](const std::vector<double>& v) {
    if (v.size() < 2) return false;
    for (std::size_t k = 1; k < v.size(); ++k)
      if (!(v[k] > v[k - 1])) return false;
    return true;
  };
  rep.sep_increasing = increasing(s1) && increasing(s2);
  rep.drift_ok = !rep.rows.empty() && rep.drift_max <= o.drift_bound;
  if (!rep.applicable) {
    // beta = 0: nothing to assert
    rep.passed = rep.failures.empty();
    return rep;
  }
  if (!rep.sep_increasing) rep.failures.push_back("separation ratio not increasing");
  if (!rep.drift_ok) rep.failures.push_back("drift above bound");
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace gpelab
