#include "core/trial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace gpelab {

namespace {

double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

void require_resolved(double tau, const Grid2D& grid) {
  if (1.0 / tau < 4.0 * grid.spacing())
    fail(ErrorCode::UnderResolved, "1/tau = " + std::to_string(1.0 / tau) + " is below 4h = " +
                                       std::to_string(4.0 * grid.spacing()));
}

bool fits(const Grid2D& grid, Point c, double radius) {
  const double L = grid.half_width();
  return c.x - radius >= -L && c.x + radius < L && c.y - radius >= -L && c.y + radius < L;
}

// Smallest even n >= need of the form 2^a 3^b 5^c.
int fft_size(int need) {
  for (int n = std::max(need, 64);; ++n) {
    if (n % 2) continue;
    int m = n;
    for (int f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = psi(t), b = psi(1.0 - t);
  return a / (a + b);
}

double cutoff(double r) { return smooth_step(2.0 - std::abs(r)); }

Point trial_center(const TrialParams& p, int component) {
  require(component == 1 || component == 2, "component must be 1 or 2");
  const double shift = p.C0 * std::log(p.tau) / p.tau;
  const Point x = component == 1 ? p.xbar1 : p.xbar2;
  const double sign = component == 1 ? 1.0 : -1.0;  // -(-1)^i
  return {x.x + sign * shift * p.n.x, x.y + sign * shift * p.n.y};
}

static void validate(const TrialParams& p) {
  require(p.tau > 1.0 && std::isfinite(p.tau), "tau must exceed 1");
  require(p.R > 0.0, "cutoff radius must be positive");
  require(p.C0 > 0.0, "C0 must be positive");
  require(std::abs(std::hypot(p.n.x, p.n.y) - 1.0) < 1e-12, "direction must be a unit vector");
}

double normalization_defect(const TrialParams& p, const RadialProfile& profile) {
  validate(p);
  // (2 pi / a*) int_{tau R}^inf (1 - cutoff^2(r / tau R)) Q^2 r dr
  const double r0 = p.tau * p.R;
  const double r1 = std::max(2.0 * r0, profile.r_max()) + 40.0;
  const int n = 20000;
  const double h = (r1 - r0) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = r0 + i * h;
    const double c = cutoff(r / r0);
    const double q = profile.value(r);
    const double f = (1.0 - c * c) * q * q * r;
    s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  return 2.0 * std::numbers::pi * s * h / 3.0 / profile.mass();
}

ScalarField build_trial_component(const TrialParams& p, int component, const RadialProfile& profile,
                                  const Grid2D& grid) {
  validate(p);
  require_resolved(p.tau, grid);
  const double defect = normalization_defect(p, profile);
  if (!(defect < 1e-8))
    fail(ErrorCode::InvalidArgument,
         "tau*R too small: normalization defect " + std::to_string(defect) + " >= 1e-8");
  const Point c = trial_center(p, component);
  if (!fits(grid, c, 2.0 * p.R))
    fail(ErrorCode::OutOfRange, "trial support does not fit inside the grid");
  const double amp = p.tau / std::sqrt(profile.mass());
  const double support = 2.0 * p.R;
  ScalarField u = sample(grid, [&](Point x) {
    const double rho = distance(x, c);
    if (rho >= support) return 0.0;
    return amp * cutoff(rho / p.R) * profile.value(p.tau * rho);
  });
  normalize(u);
  return u;
}

FieldPair build_trial_pair(const TrialParams& p, const RadialProfile& profile, const Grid2D& grid) {
  return {build_trial_component(p, 1, profile, grid), build_trial_component(p, 2, profile, grid)};
}

ScalarField bump_field(const Grid2D& grid, Point center, double radius) {
  require(radius > 0.0, "bump radius must be positive");
  if (!fits(grid, center, radius)) fail(ErrorCode::OutOfRange, "bump does not fit inside the grid");
  ScalarField u = sample(grid, [&](Point x) {
    const double s = distance(x, center) / radius;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  });
  normalize(u);
  return u;
}

TrialTerms trial_terms(const FieldPair& pair, const ProblemSpec& spec, double tau) {
  require_same_grid(pair.u1, pair.u2);
  TrialTerms t;
  t.tau = tau;
  const ScalarField* u[2] = {&pair.u1, &pair.u2};
  const TrapSpec* trap[2] = {&spec.trap1, &spec.trap2};
  const double a[2] = {spec.a1, spec.a2};
  const Grid2D& g = pair.u1.grid();
  const double h2 = g.spacing() * g.spacing();
  const int n = g.points_per_side();
  for (int i = 0; i < 2; ++i) {
    t.kinetic[i] = gradient_sq_integral(*u[i]);
    t.quartic[i] = integrate_power(*u[i], 4);
    double pot = 0.0;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy) {
        const double v = u[i]->at(ix, iy);
        if (v != 0.0) pot += (*trap[i])(g.point(ix, iy)) * v * v;
      }
    t.potential[i] = pot * h2;
  }
  double ov = 0.0;
  const auto x = pair.u1.values(), y = pair.u2.values();
  for (std::size_t j = 0; j < x.size(); ++j) ov += x[j] * x[j] * y[j] * y[j];
  t.overlap = ov * h2;
  for (int i = 0; i < 2; ++i) t.energy += t.kinetic[i] + t.potential[i] - 0.5 * a[i] * t.quartic[i];
  t.energy += spec.beta * t.overlap;
  return t;
}

LadderResult demonstrate_unbounded(const UnboundedConfig& c, const Grid2D& grid,
                                   const RadialProfile& profile) {
  require(c.a1 >= profile.mass(), "the unbounded demonstration needs a1 >= a*");
  require(!c.taus.empty(), "empty tau ladder");
  const ProblemSpec spec{c.a1, c.a2, c.beta, c.trap1, c.trap2};
  const ScalarField eta = bump_field(grid, c.eta_center, c.eta_radius);
  LadderResult out;
  bool truncated = false;
  for (double tau : c.taus) {
    if (truncated || 1.0 / tau < 4.0 * grid.spacing()) {
      truncated = true;
      out.skipped.push_back(tau);
      continue;
    }
    TrialParams p;
    p.tau = tau;
    p.R = c.R;
    p.C0 = c.C0;
    p.n = c.n;
    p.xbar1 = c.xbar1;
    p.xbar2 = c.eta_center;
    const FieldPair pair{build_trial_component(p, 1, profile, grid), eta};
    out.rows.push_back(trial_terms(pair, spec, tau));
  }
  if (out.rows.empty()) fail(ErrorCode::UnderResolved, "no tau on the ladder is resolved by the grid");
  return out;
}

double same_trap_tau(double astar, double a1, double p) {
  const double d = astar - a1;
  require(d > 0.0 && d < 1.0, "same-trap tau needs 0 < a* - a1 < 1");
  require(p > 0.0, "trap exponent must be positive");
  return std::pow(d, -1.0 / (p + 2.0)) * std::pow(std::log(1.0 / d), p / (p + 2.0));
}

Grid2D same_trap_grid(const SameTrapConfig& c, double tau) {
  const double R = c.tau_R / tau;
  const double shift = c.C0 * std::log(tau) / tau;
  const double extent = std::max(std::abs(c.x0.x), std::abs(c.x0.y)) + shift + 2.0 * R;
  const double L = 1.05 * extent + 0.1;
  const double h = 1.0 / (8.0 * tau);
  return Grid2D(L, fft_size(static_cast<int>(std::ceil(2.0 * L / h))));
}

SameTrapBound same_trap_upper_bound(const SameTrapConfig& c, const Grid2D& grid,
                                    const RadialProfile& profile) {
  const double astar = profile.mass();
  const double tau = same_trap_tau(astar, c.a1, c.p);
  require(tau > 1.0, "same-trap tau must exceed 1 (a1 too far from a*)");
  TrialParams p;
  p.tau = tau;
  p.R = c.tau_R / tau;
  p.C0 = c.C0;
  p.n = c.n;
  p.xbar1 = p.xbar2 = c.x0;
  const FieldPair pair = build_trial_pair(p, profile, grid);
  const ProblemSpec spec{c.a1, c.a2, c.beta, {c.x0, c.p}, {c.x0, c.p}};
  SameTrapBound b;
  b.tau = tau;
  b.terms = trial_terms(pair, spec, tau);
  b.energy = b.terms.energy;
  const double d = astar - c.a1;
  b.ratio = b.energy / (std::pow(d, c.p / (c.p + 2.0)) *
                        std::pow(std::log(1.0 / d), 2.0 * c.p / (c.p + 2.0)));
  b.half_width = grid.half_width();
  b.points = grid.points_per_side();
  return b;
}

SameTrapBound same_trap_upper_bound(const SameTrapConfig& c, const RadialProfile& profile) {
  const double tau = same_trap_tau(profile.mass(), c.a1, c.p);
  return same_trap_upper_bound(c, same_trap_grid(c, tau), profile);
}

double lemma_a_f(const LemmaAParams& q, double s) {
  const double g = std::log(s) / s;
  return (q.astar - q.a) / q.kappa * s * s + q.m * std::pow(std::abs(g), q.p);
}

double lemma_a_df(const LemmaAParams& q, double s) {
  const double ls = std::log(s);
  const double g = ls / s;
  const double dg = (1.0 - ls) / (s * s);
  return 2.0 * (q.astar - q.a) / q.kappa * s + q.m * q.p * std::pow(g, q.p - 1.0) * dg;
}

double lemma_a_d2f(const LemmaAParams& q, double s) {
  const double ls = std::log(s);
  const double g = ls / s;
  const double dg = (1.0 - ls) / (s * s);
  const double d2g = (2.0 * ls - 3.0) / (s * s * s);
  return 2.0 * (q.astar - q.a) / q.kappa +
         q.m * (q.p * (q.p - 1.0) * std::pow(g, q.p - 2.0) * dg * dg +
                q.p * std::pow(g, q.p - 1.0) * d2g);
}

LemmaAResult lemma_a_minimize(const LemmaAParams& q) {
  require(q.kappa > 0.0 && q.m > 0.0 && q.p > 0.0, "kappa, m and p must be positive");
  require(q.a > 0.0 && q.a < q.astar, "a must lie in (0, a*)");
  const double lo0 = std::exp(3.0);
  if (!(lemma_a_df(q, lo0) < 0.0))
    fail(ErrorCode::OutOfRegime, "f is increasing at e^3: the minimum is not above e^3");

  double lo = lo0, hi = 2.0 * lo0;
  for (int k = 0; lemma_a_df(q, hi) < 0.0; ++k) {
    if (k == 2000) fail(ErrorCode::NoBracket, "no upper bracket for f' = 0");
    lo = hi;
    hi *= 2.0;
  }

  LemmaAResult r;
  double s = std::sqrt(lo * hi);
  int it = 0;
  for (; it < 200; ++it) {
    const double d1 = lemma_a_df(q, s);
    const double d2 = lemma_a_d2f(q, s);
    if (!(d2 > 0.0)) r.convex_at_iterates = false;
    if (d1 < 0.0) lo = s;
    else if (d1 > 0.0) hi = s;
    else break;
    double next = s - d1 / d2;
    if (!(d2 > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - s) <= 4.0 * std::numeric_limits<double>::epsilon() * s ||
                      hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * s;
    s = next;
    if (done) break;
  }
  if (it == 200) fail(ErrorCode::NotConverged, "Newton iteration for Lemma A did not converge");

  const double d = q.astar - q.a;
  r.s1 = s;
  r.f_min = lemma_a_f(q, s);
  r.iterations = it + 1;
  const double lnp = std::pow(std::log(s), q.p / (q.p + 2.0));
  r.bracket_lower = std::pow(q.m * q.p * q.kappa / (3.0 * d), 1.0 / (q.p + 2.0)) * lnp;
  r.bracket_upper = std::pow(q.m * q.p * q.kappa / (2.0 * d), 1.0 / (q.p + 2.0)) * lnp;
  r.bracket_holds = r.bracket_lower <= s && s <= r.bracket_upper;
  r.bound_ratio = d < 1.0 ? r.f_min / (std::pow(d, q.p / (q.p + 2.0)) *
                                       std::pow(std::log(1.0 / d), 2.0 * q.p / (q.p + 2.0)))
                          : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace gpelab
