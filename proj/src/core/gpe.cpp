#include "core/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/error.hpp"

namespace gpelab {

double TrapSpec::operator()(Point x) const {
  const double r = distance(x, center);
  if (p == 2.0) return r * r;
  return r == 0.0 ? 0.0 : std::pow(r, p);
}

const char* status_name(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NotConverged: return "not_converged";
    case SolveStatus::CollapseDetected: return "collapse_detected";
  }
  return "unknown";
}

ScalarField gaussian_seed(const Grid2D& grid, Point center, double width) {
  require(width > 0.0, "seed width must be positive");
  ScalarField u = sample(grid, [&](Point x) {
    const double dx = x.x - center.x, dy = x.y - center.y;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width)) / (std::sqrt(std::numbers::pi) * width);
  });
  normalize(u);
  return u;
}

namespace {

// K-component problem (K = 1 or 2) with precomputed trap samples.
struct Problem {
  Grid2D grid;
  int K;
  double a[2];
  double beta;
  std::vector<ScalarField> V;

  Problem(const Grid2D& g, int k, double a1, double a2, double b, const TrapSpec& t1,
          const TrapSpec& t2)
      : grid(g), K(k), a{a1, a2}, beta(b) {
    V.push_back(sample(g, t1));
    if (K == 2) V.push_back(sample(g, t2));
  }
};

struct Terms {
  double kin[2] = {0, 0}, pot[2] = {0, 0}, q4[2] = {0, 0};
  double cross = 0.0;
  double comp[2] = {0, 0};
  double energy = 0.0;
};

Terms evaluate(const Problem& P, const std::vector<ScalarField>& u) {
  Terms t;
  const double h2 = P.grid.spacing() * P.grid.spacing();
  for (int i = 0; i < P.K; ++i) {
    t.kin[i] = gradient_sq_integral(u[i]);
    const auto v = P.V[i].values();
    const auto x = u[i].values();
    double pot = 0.0, q4 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double s = x[j] * x[j];
      pot += v[j] * s;
      q4 += s * s;
    }
    t.pot[i] = pot * h2;
    t.q4[i] = q4 * h2;
  }
  if (P.K == 2) {
    const auto x = u[0].values(), y = u[1].values();
    double c = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) c += x[j] * x[j] * y[j] * y[j];
    t.cross = c * h2;
  }
  for (int i = 0; i < P.K; ++i) {
    t.comp[i] = t.kin[i] + t.pot[i] - 0.5 * P.a[i] * t.q4[i];
    t.energy += t.comp[i];
  }
  t.energy += P.beta * t.cross;
  return t;
}

// H_i u_i = -Lap u_i + V_i u_i - a_i u_i^3 + beta u_j^2 u_i.
std::vector<ScalarField> apply_hamiltonian(const Problem& P, const std::vector<ScalarField>& u) {
  std::vector<ScalarField> out;
  for (int i = 0; i < P.K; ++i) {
    ScalarField hu = apply_laplacian(u[i]);
    auto o = hu.values();
    const auto x = u[i].values();
    const auto v = P.V[i].values();
    const double a = P.a[i];
    if (P.K == 2) {
      const auto y = u[1 - i].values();
      for (std::size_t j = 0; j < x.size(); ++j)
        o[j] = -o[j] + (v[j] - a * x[j] * x[j] + P.beta * y[j] * y[j]) * x[j];
    } else {
      for (std::size_t j = 0; j < x.size(); ++j) o[j] = -o[j] + (v[j] - a * x[j] * x[j]) * x[j];
    }
    out.push_back(std::move(hu));
  }
  return out;
}

double support_max_abs(const ScalarField& r, const ScalarField& u) {
  const double cut = 1e-8 * u.max_value();
  const auto rv = r.values(), uv = u.values();
  double m = 0.0;
  for (std::size_t j = 0; j < rv.size(); ++j)
    if (uv[j] > cut) m = std::max(m, std::abs(rv[j]));
  return m;
}

// Riemannian gradient data at the current iterate.
struct Gradient {
  std::vector<ScalarField> r;  // H u - mu u (tangent)
  std::vector<ScalarField> z;  // projected preconditioned gradient
  double mu[2] = {0, 0};
  double residual = 0.0;
};

// P = D^{-1/2} (alpha - Lap)^{-1} D^{-1/2}, D = (alpha + V) / alpha.
class Preconditioner {
 public:
  Preconditioner(const Problem& P, int i, double alpha) : grid_(P.grid), alpha_(alpha) {
    const auto v = P.V[i].values();
    scale_.resize(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) scale_[j] = std::sqrt(alpha / (alpha + v[j]));
    spec_.resize(grid_.spectral_size());
  }

  ScalarField apply(const ScalarField& r) {
    ScalarField out(grid_);
    auto o = out.values();
    const auto x = r.values();
    for (std::size_t j = 0; j < x.size(); ++j) o[j] = scale_[j] * x[j];
    grid_.forward(out.data(), spec_.data());
    const auto ksq = grid_.k_squared();
    const double n2 = static_cast<double>(grid_.size());
    for (std::size_t j = 0; j < spec_.size(); ++j) spec_[j] /= (alpha_ + ksq[j]) * n2;
    grid_.inverse(spec_.data(), out.data());
    for (std::size_t j = 0; j < x.size(); ++j) o[j] *= scale_[j];
    return out;
  }

 private:
  Grid2D grid_;
  double alpha_;
  AlignedVector<double> scale_;
  AlignedVector<Complex> spec_;
};

Gradient gradient(const Problem& P, const std::vector<ScalarField>& u, const Terms& t) {
  Gradient g;
  auto hu = apply_hamiltonian(P, u);
  for (int i = 0; i < P.K; ++i) {
    g.mu[i] = inner(hu[i], u[i]);
    auto r = hu[i].values();
    const auto x = u[i].values();
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= g.mu[i] * x[j];
    g.residual = std::max(g.residual, support_max_abs(hu[i], u[i]));

    Preconditioner pc(P, i, std::max(1.0, t.kin[i]));
    ScalarField pr = pc.apply(hu[i]);
    ScalarField pu = pc.apply(u[i]);
    const double c = inner(u[i], pr) / inner(u[i], pu);
    auto zv = pr.values();
    const auto puv = pu.values();
    for (std::size_t j = 0; j < zv.size(); ++j) zv[j] -= c * puv[j];
    g.r.push_back(std::move(hu[i]));
    g.z.push_back(std::move(pr));
  }
  return g;
}

double dot(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

std::vector<ScalarField> retract(const std::vector<ScalarField>& u, const std::vector<ScalarField>& d,
                                 double t) {
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ScalarField w(u[i].grid());
    auto o = w.values();
    const auto x = u[i].values(), y = d[i].values();
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = x[j] + t * y[j];
    normalize(w);
    out.push_back(std::move(w));
  }
  return out;
}

// Removes the radial component of d at u (vector transport onto the sphere).
void project_tangent(std::vector<ScalarField>& d, const std::vector<ScalarField>& u) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double c = inner(u[i], d[i]);
    auto dv = d[i].values();
    const auto x = u[i].values();
    for (std::size_t j = 0; j < dv.size(); ++j) dv[j] -= c * x[j];
  }
}

struct RunOutcome {
  std::vector<ScalarField> u;
  int iterations = 0;
  SolveStatus status = SolveStatus::NotConverged;
  std::vector<Checkpoint> history;
  double energy = 0.0;
};

RunOutcome run(const Problem& P, std::vector<ScalarField> u, const MinimizeOptions& o) {
  RunOutcome out;
  const double h = P.grid.spacing();
  const double collapse_bound = 0.5 / (h * h);
  const bool cg = o.method == Method::ConjugateGradient;
  constexpr double c1 = 1e-4;

  Terms t = evaluate(P, u);
  Gradient g = gradient(P, u, t);
  std::vector<ScalarField> d;
  for (auto& z : g.z) {
    ScalarField w = z;
    for (double& v : w.values()) v = -v;
    d.push_back(std::move(w));
  }
  double step = o.initial_step;
  double prev_slope = 0.0;
  double rz_old = dot(g.r, g.z);
  int it = 0;
  for (; it < o.max_iterations; ++it) {
    if (o.history_stride > 0 && it % o.history_stride == 0)
      out.history.push_back({it, t.energy, g.residual});

    double slope = 2.0 * dot(g.r, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = g.z[i];
        for (double& v : d[i].values()) v = -v;
      }
      slope = 2.0 * dot(g.r, d);
    }
    if (!(slope < 0.0)) {
      // Only possible when the gradient has vanished numerically.
      out.status = g.residual < o.tolerance ? SolveStatus::Converged : SolveStatus::NotConverged;
      break;
    }
    if (it > 0 && prev_slope < 0.0) step = std::clamp(step * prev_slope / slope, 1e-3 * step, 1e3 * step);
    step = std::clamp(step, 1e-12, 1e4);

    // Backtracking with quadratic interpolation; one extra trial at the
    // minimizer of the quadratic model if it looks better.
    const double e0 = t.energy;
    double magnitude = P.beta * t.cross;
    for (int i = 0; i < P.K; ++i) magnitude += t.kin[i] + t.pot[i] + 0.5 * P.a[i] * t.q4[i];
    const double noise = 1e-12 * magnitude;
    bool accepted = false;
    std::vector<ScalarField> un;
    Terms tn;
    std::optional<Gradient> gn_ready;
    double ts = step;
    for (int k = 0; k < 60; ++k) {
      un = retract(u, d, ts);
      tn = evaluate(P, un);
      const double curv = tn.energy - e0 - slope * ts;
      if (tn.energy > e0 + c1 * ts * slope && tn.energy <= e0 + noise) {
        // Energy differences are at rounding level; fall back to approximate
        // Wolfe conditions on the directional derivative.
        Gradient gt = gradient(P, un, tn);
        std::vector<ScalarField> dt = d;
        project_tangent(dt, un);
        const double st = 2.0 * dot(gt.r, dt);
        if (st >= 0.9 * slope && st <= (2.0 * c1 - 1.0) * slope) {
          gn_ready = std::move(gt);
          accepted = true;
          break;
        }
        const double secant = slope - st;
        double next = secant > 0.0 ? ts * slope / (slope - st) : 0.5 * ts;
        if (st < 0.9 * slope) next = std::max(next, 2.0 * ts);
        ts = std::clamp(next, 0.1 * ts, 10.0 * ts);
        if (ts < 1e-16) break;
        continue;
      }
      if (tn.energy <= e0 + c1 * ts * slope) {
        if (k == 0 && curv > 0.0) {
          const double tq = -slope * ts * ts / (2.0 * curv);
          if (tq > 1.2 * ts && tq < 10.0 * ts) {
            auto uq = retract(u, d, tq);
            Terms tq_terms = evaluate(P, uq);
            if (tq_terms.energy < tn.energy) {
              un = std::move(uq);
              tn = tq_terms;
              ts = tq;
            }
          }
        }
        accepted = true;
        break;
      }
      double next = curv > 0.0 ? -slope * ts * ts / (2.0 * curv) : 0.5 * ts;
      ts = std::clamp(next, 0.1 * ts, 0.5 * ts);
      if (ts < 1e-16) break;
    }

    if (!accepted) {
      const bool was_steepest = dot(d, g.z) <= -(1.0 - 1e-12) * dot(g.z, g.z);
      if (g.residual < o.tolerance) {
        out.status = SolveStatus::Converged;
        break;
      }
      if (was_steepest) break;
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = g.z[i];
        for (double& v : d[i].values()) v = -v;
      }
      prev_slope = 0.0;
      continue;
    }

    const double decrease = (e0 - tn.energy) / std::max(std::abs(tn.energy), 1e-300);
    u = std::move(un);
    t = tn;
    step = ts;
    prev_slope = slope;

    bool collapsed = false;
    for (int i = 0; i < P.K; ++i) collapsed = collapsed || t.q4[i] > collapse_bound;
    if (collapsed && decrease > 0.0) {
      out.status = SolveStatus::CollapseDetected;
      ++it;
      break;
    }

    Gradient gn = gn_ready ? std::move(*gn_ready) : gradient(P, u, t);
    if (gn.residual < o.tolerance && decrease < o.energy_tolerance) {
      g = std::move(gn);
      out.status = SolveStatus::Converged;
      ++it;
      break;
    }

    double beta_cg = 0.0;
    const double rz_new = dot(gn.r, gn.z);
    if (cg && rz_old > 0.0) beta_cg = std::max(0.0, (rz_new - dot(gn.r, g.z)) / rz_old);
    rz_old = rz_new;
    project_tangent(d, u);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto dv = d[i].values();
      const auto zv = gn.z[i].values();
      for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = -zv[j] + beta_cg * dv[j];
    }
    g = std::move(gn);
  }
  if (o.history_stride > 0) out.history.push_back({it, t.energy, g.residual});
  out.iterations = it;
  out.energy = t.energy;
  out.u = std::move(u);
  return out;
}

std::vector<ScalarField> check_initial(const MinimizeOptions& o, const Grid2D& grid, int K) {
  require(static_cast<int>(o.initial.size()) == K, "initial fields must match the component count");
  std::vector<ScalarField> u;
  for (const auto& f : o.initial) {
    if (!f.grid().same_as(grid)) fail(ErrorCode::GridMismatch, "initial field on a different grid");
    if (!f.all_finite()) fail(ErrorCode::InvalidArgument, "initial field is not finite");
    ScalarField w = f;
    for (double& v : w.values()) v = std::abs(v);
    normalize(w);
    u.push_back(std::move(w));
  }
  return u;
}

void validate(const MinimizeOptions& o) {
  require(o.tolerance > 0.0, "tolerance must be positive");
  require(o.energy_tolerance > 0.0, "energy tolerance must be positive");
  require(o.max_iterations > 0, "max_iterations must be positive");
  require(o.initial_step > 0.0, "initial step must be positive");
}

Multipliers multipliers_impl(const Problem& P, const std::vector<ScalarField>& u, double* residual) {
  const Terms t = evaluate(P, u);
  const auto hu = apply_hamiltonian(P, u);
  double mu[2] = {0, 0}, quo[2] = {0, 0};
  for (int i = 0; i < P.K; ++i) {
    mu[i] = t.comp[i] - 0.5 * P.a[i] * t.q4[i] + P.beta * t.cross;
    quo[i] = inner(hu[i], u[i]);
  }
  if (residual) {
    double r = 0.0;
    for (int i = 0; i < P.K; ++i) {
      ScalarField d = hu[i];
      auto dv = d.values();
      const auto x = u[i].values();
      for (std::size_t j = 0; j < dv.size(); ++j) dv[j] -= mu[i] * x[j];
      r = std::max(r, support_max_abs(d, u[i]));
    }
    *residual = r;
  }
  return {mu[0], mu[1], quo[0], quo[1]};
}

SolveResult finish(const Problem& P, RunOutcome&& r) {
  // The discrete minimizer may carry rounding-level negative samples far out
  // in the tail; they are folded back here rather than every iteration.
  for (auto& f : r.u)
    for (double& v : f.values()) v = std::abs(v);
  SolveResult res;
  const Terms t = evaluate(P, r.u);
  for (int i = 0; i < P.K; ++i) {
    res.kinetic[i] = t.kin[i];
    res.potential[i] = t.pot[i];
    res.quartic[i] = t.q4[i];
    res.component_energy[i] = t.comp[i];
  }
  res.interaction = t.cross;
  res.energy = t.energy;
  const Multipliers m = multipliers_impl(P, r.u, &res.residual);
  res.mu[0] = m.mu1;
  res.mu[1] = m.mu2;
  res.multiplier_discrepancy = std::max(std::abs(m.mu1 - m.quotient1), std::abs(m.mu2 - m.quotient2));
  res.iterations = r.iterations;
  res.status = r.status;
  res.converged = r.status == SolveStatus::Converged;
  res.history = std::move(r.history);
  res.fields = std::move(r.u);
  return res;
}

}  // namespace

double energy(const FieldPair& pair, const ProblemSpec& spec) {
  require_same_grid(pair.u1, pair.u2);
  Problem P(pair.u1.grid(), 2, spec.a1, spec.a2, spec.beta, spec.trap1, spec.trap2);
  return evaluate(P, {pair.u1, pair.u2}).energy;
}

double energy(const ScalarField& u, double a, const TrapSpec& trap) {
  Problem P(u.grid(), 1, a, 0.0, 0.0, trap, trap);
  return evaluate(P, {u}).energy;
}

Multipliers extract_multipliers(const FieldPair& pair, const ProblemSpec& spec) {
  require_same_grid(pair.u1, pair.u2);
  Problem P(pair.u1.grid(), 2, spec.a1, spec.a2, spec.beta, spec.trap1, spec.trap2);
  return multipliers_impl(P, {pair.u1, pair.u2}, nullptr);
}

double euler_lagrange_residual(const FieldPair& pair, const ProblemSpec& spec, const Multipliers& mu) {
  require_same_grid(pair.u1, pair.u2);
  Problem P(pair.u1.grid(), 2, spec.a1, spec.a2, spec.beta, spec.trap1, spec.trap2);
  const std::vector<ScalarField> u{pair.u1, pair.u2};
  const auto hu = apply_hamiltonian(P, u);
  const double m[2] = {mu.mu1, mu.mu2};
  double r = 0.0;
  for (int i = 0; i < 2; ++i) {
    ScalarField d = hu[i];
    auto dv = d.values();
    const auto x = u[i].values();
    for (std::size_t j = 0; j < dv.size(); ++j) dv[j] -= m[i] * x[j];
    r = std::max(r, support_max_abs(d, u[i]));
  }
  return r;
}

SolveResult minimize_single(double a, const TrapSpec& trap, const Grid2D& grid,
                            const MinimizeOptions& options) {
  validate(options);
  require(a >= 0.0 && std::isfinite(a), "coupling a must be >= 0");
  require(trap.p > 0.0, "trap exponent must be positive");
  Problem P(grid, 1, a, 0.0, 0.0, trap, trap);
  std::vector<ScalarField> u;
  if (!options.initial.empty())
    u = check_initial(options, grid, 1);
  else
    u.push_back(gaussian_seed(grid, trap.center, options.seed_width));
  return finish(P, run(P, std::move(u), options));
}

SolveResult minimize_pair(const ProblemSpec& spec, const Grid2D& grid, const MinimizeOptions& options) {
  validate(options);
  require(spec.a1 >= 0.0 && spec.a2 >= 0.0, "couplings must be >= 0");
  require(spec.beta >= 0.0, "beta must be >= 0");
  require(spec.trap1.p > 0.0 && spec.trap2.p > 0.0, "trap exponents must be positive");
  Problem P(grid, 2, spec.a1, spec.a2, spec.beta, spec.trap1, spec.trap2);

  if (!options.initial.empty()) return finish(P, run(P, check_initial(options, grid, 2), options));

  const Point c1 = spec.trap1.center, c2 = spec.trap2.center;
  const bool coincident = c1.x == c2.x && c1.y == c2.y;
  if (!coincident) {
    std::vector<ScalarField> u{gaussian_seed(grid, c1, options.seed_width),
                               gaussian_seed(grid, c2, options.seed_width)};
    return finish(P, run(P, std::move(u), options));
  }

  // Coincident traps: break the exchange symmetry with offset seeds and keep
  // the lowest energy.
  std::vector<double> offsets{2.0 * grid.spacing()};
  offsets.insert(offsets.end(), options.extra_offsets.begin(), options.extra_offsets.end());
  std::optional<SolveResult> best;
  for (double s : offsets) {
    std::vector<ScalarField> u{gaussian_seed(grid, {c1.x - s, c1.y}, options.seed_width),
                               gaussian_seed(grid, {c2.x + s, c2.y}, options.seed_width)};
    SolveResult r = finish(P, run(P, std::move(u), options));
    r.seed_offset = s;
    const bool better = !best || (r.converged && !best->converged) ||
                        (r.converged == best->converged && r.energy < best->energy);
    if (better) best = std::move(r);
  }
  return std::move(*best);
}

}  // namespace gpelab
