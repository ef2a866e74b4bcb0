#include "core/townes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "json.hpp"

namespace gpelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Lo/hi trajectories are trusted while they agree to this relative level.
constexpr double kSplitTolerance = 1e-6;
// Tail contributions to the radial integrals are taken out to r_max + this.
constexpr double kTailSpan = 40.0;

enum class Shot { Under, Over, Undecided };

struct Trajectory {
  Shot outcome = Shot::Undecided;
  std::vector<double> q, dq;  // node values up to (excluding) termination
};

struct State {
  double q, p;
};

State rhs(double r, State y) { return {y.p, -y.p / r + y.q - y.q * y.q * y.q}; }

// One Dormand-Prince 5(4) step; returns the 5th-order solution and the error estimate.
std::pair<State, State> dopri_step(double r, State y, double h) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto comb = [&](std::initializer_list<std::pair<double, State>> terms) {
    State s = y;
    for (auto& [w, k] : terms) {
      s.q += h * w * k.q;
      s.p += h * w * k.p;
    }
    return s;
  };
  const State k1 = rhs(r, y);
  const State k2 = rhs(r + c2 * h, comb({{a21, k1}}));
  const State k3 = rhs(r + c3 * h, comb({{a31, k1}, {a32, k2}}));
  const State k4 = rhs(r + c4 * h, comb({{a41, k1}, {a42, k2}, {a43, k3}}));
  const State k5 = rhs(r + c5 * h, comb({{a51, k1}, {a52, k2}, {a53, k3}, {a54, k4}}));
  const State k6 = rhs(r + h, comb({{a61, k1}, {a62, k2}, {a63, k3}, {a64, k4}, {a65, k5}}));
  const State y5 = comb({{b1, k1}, {b3, k3}, {b4, k4}, {b5, k5}, {b6, k6}});
  const State k7 = rhs(r + h, y5);
  State err{h * (e1 * k1.q + e3 * k3.q + e4 * k4.q + e5 * k5.q + e6 * k6.q + e7 * k7.q),
            h * (e1 * k1.p + e3 * k3.p + e4 * k4.p + e5 * k5.p + e6 * k6.p + e7 * k7.p)};
  return {y5, err};
}

Trajectory shoot(double q0, double dr, int nodes, double rtol, bool record) {
  Trajectory t;
  if (record) {
    t.q.reserve(nodes + 1);
    t.dq.reserve(nodes + 1);
    t.q.push_back(q0);
    t.dq.push_back(0.0);
  }
  // Series start removes the 1/r singularity.
  const double b = (q0 - q0 * q0 * q0) / 4.0;
  const double c = (1.0 - 3.0 * q0 * q0) * b / 16.0;
  State y{q0 + b * dr * dr + c * dr * dr * dr * dr, 2.0 * b * dr + 4.0 * c * dr * dr * dr};
  const double atol = rtol * 1e-4;
  double h = dr;
  for (int j = 1; j <= nodes; ++j) {
    if (y.q <= 0.0) {
      t.outcome = Shot::Over;
      return t;
    }
    if (y.p > 0.0) {
      t.outcome = Shot::Under;
      return t;
    }
    if (record) {
      t.q.push_back(y.q);
      t.dq.push_back(y.p);
    }
    if (j == nodes) break;
    double r = j * dr;
    const double r_end = (j + 1) * dr;
    while (r < r_end) {
      const double step = std::min(h, r_end - r);
      auto [next, err] = dopri_step(r, y, step);
      const double scale_q = atol + rtol * std::max(std::abs(y.q), std::abs(next.q));
      const double scale_p = atol + rtol * std::max(std::abs(y.p), std::abs(next.p));
      const double e = std::max(std::abs(err.q) / scale_q, std::abs(err.p) / scale_p);
      if (e <= 1.0 || step < 1e-12) {
        r = (r_end - r - step <= 1e-15 * r_end) ? r_end : r + step;
        y = next;
      }
      const double factor = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
      h = step * std::clamp(factor, 0.2, 5.0);
    }
  }
  return t;
}

Shot classify(double q0, double dr, int nodes, double rtol) {
  return shoot(q0, dr, nodes, rtol, false).outcome;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size() - 1;  // intervals, even
  double s = f.front() + f.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

double tail_value(const TailFit& t, double r) {
  return t.coefficient * std::exp(-r) / std::sqrt(r);
}

}  // namespace

RadialProfile::RadialProfile(std::vector<double> radii, std::vector<double> q,
                             std::vector<double> dq, TailFit tail)
    : radii_(std::move(radii)), q_(std::move(q)), dq_(std::move(dq)), tail_(tail) {
  const std::size_t n = radii_.size();
  if (n < 3 || q_.size() != n || dq_.size() != n)
    fail(ErrorCode::InvalidArgument, "radial profile needs >= 3 nodes and matching arrays");
  if (radii_.front() != 0.0) fail(ErrorCode::InvalidArgument, "radial mesh must start at 0");
  for (std::size_t i = 1; i < n; ++i)
    if (!(radii_[i] > radii_[i - 1])) fail(ErrorCode::InvalidArgument, "radial mesh must increase");

  step_ = radii_[1];
  uniform_ = true;
  for (std::size_t i = 1; i < n && uniform_; ++i)
    uniform_ = std::abs(radii_[i] - i * step_) <= 1e-9 * step_ * static_cast<double>(i);

  // Fritsch-Carlson limited slopes.
  slope_ = dq_;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double delta = (q_[k + 1] - q_[k]) / (radii_[k + 1] - radii_[k]);
    if (delta == 0.0) {
      slope_[k] = slope_[k + 1] = 0.0;
      continue;
    }
    double a = slope_[k] / delta, b = slope_[k + 1] / delta;
    if (a < 0.0) slope_[k] = a = 0.0;
    if (b < 0.0) slope_[k + 1] = b = 0.0;
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      slope_[k] = tau * a * delta;
      slope_[k + 1] = tau * b * delta;
    }
  }

  std::vector<double> m(n), kin(n), q4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radii_[i];
    m[i] = r * q_[i] * q_[i];
    kin[i] = r * dq_[i] * dq_[i];
    q4[i] = r * q_[i] * q_[i] * q_[i] * q_[i];
  }
  const bool simp = uniform_ && (n - 1) % 2 == 0;
  auto integ = [&](const std::vector<double>& f) {
    return kTwoPi * (simp ? simpson(f, step_) : trapezoid(radii_, f));
  };
  mass_ = integ(m);
  kinetic_ = integ(kin);
  quartic_ = integ(q4);
  if (tail_.valid) {
    const int k = 4000;
    const double h = kTailSpan / k;
    std::vector<double> tm(k + 1), tk(k + 1), tq(k + 1);
    for (int i = 0; i <= k; ++i) {
      const double r = r_max() + i * h;
      const double v = tail_value(tail_, r);
      const double d = -v * (1.0 + 0.5 / r);
      tm[i] = r * v * v;
      tk[i] = r * d * d;
      tq[i] = r * v * v * v * v;
    }
    mass_ += kTwoPi * simpson(tm, h);
    kinetic_ += kTwoPi * simpson(tk, h);
    quartic_ += kTwoPi * simpson(tq, h);
  }
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  if (r >= r_max()) {
    if (r == r_max()) return q_.back();
    if (!tail_.valid) fail(ErrorCode::OutOfRange, "radius beyond the table and no tail fit");
    return tail_value(tail_, r);
  }
  std::size_t k;
  if (uniform_) {
    k = std::min(static_cast<std::size_t>(r / step_), radii_.size() - 2);
    if (radii_[k] > r) --k;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(radii_.begin(), radii_.end(), r) - radii_.begin()) - 1;
  }
  const double h = radii_[k + 1] - radii_[k];
  const double t = (r - radii_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * q_[k] + (t3 - 2 * t2 + t) * h * slope_[k] +
         (-2 * t3 + 3 * t2) * q_[k + 1] + (t3 - t2) * h * slope_[k + 1];
}

RadialProfile solve_townes(const TownesOptions& o) {
  if (!(o.tolerance > 0.0 && o.tolerance <= 1e-6))
    fail(ErrorCode::InvalidArgument, "tolerance must lie in (0, 1e-6]");
  if (!(o.r_max >= 15.0)) fail(ErrorCode::InvalidArgument, "r_max must be >= 15");
  if (!(o.step > 0.0 && o.step <= 0.05)) fail(ErrorCode::InvalidArgument, "step must lie in (0, 0.05]");

  int nodes = static_cast<int>(std::ceil(o.r_max / o.step));
  if (nodes % 2) ++nodes;
  const double dr = o.r_max / nodes;

  double lo = 2.0, hi = 2.5;
  for (int i = 0; classify(lo, dr, nodes, o.tolerance) != Shot::Under; ++i) {
    if (i == 8) fail(ErrorCode::NoBracket, "no undershooting initial value found");
    lo = 1.0 + 0.5 * (lo - 1.0);
  }
  for (int i = 0; classify(hi, dr, nodes, o.tolerance) != Shot::Over; ++i) {
    if (i == 8) fail(ErrorCode::NoBracket, "no overshooting initial value found");
    hi *= 1.5;
  }

  int iter = 0;
  for (; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Shot s = classify(mid, dr, nodes, o.tolerance);
    if (s == Shot::Over)
      hi = mid;
    else
      lo = mid;  // a trajectory that never decides is treated as an undershoot
  }
  if (iter == 200 || hi - lo > o.tolerance * lo)
    fail(ErrorCode::NotConverged, "bisection on Q(0) did not converge");

  const Trajectory a = shoot(lo, dr, nodes, o.tolerance, true);
  const Trajectory b = shoot(hi, dr, nodes, o.tolerance, true);
  const std::size_t common = std::min(a.q.size(), b.q.size());
  std::size_t cut = common - 1;
  for (std::size_t j = 1; j < common; ++j) {
    const double avg = 0.5 * (a.q[j] + b.q[j]);
    if (std::abs(a.q[j] - b.q[j]) > kSplitTolerance * avg) {
      cut = j - 1;
      break;
    }
  }

  std::vector<double> radii(nodes + 1), q(nodes + 1), dq(nodes + 1);
  for (int j = 0; j <= nodes; ++j) radii[j] = j * dr;
  for (std::size_t j = 0; j <= cut; ++j) {
    q[j] = 0.5 * (a.q[j] + b.q[j]);
    dq[j] = 0.5 * (a.dq[j] + b.dq[j]);
  }

  TailFit tail;
  tail.r_cut = radii[cut];
  if (static_cast<int>(cut) < nodes) {
    std::size_t start = cut;
    while (start > 0 && q[start - 1] <= 10.0 * q[cut]) --start;
    if (cut - start < 20 || radii[start] < 2.0)
      fail(ErrorCode::TailUnresolved, "too few resolved points to fit the exponential tail");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(cut - start + 1);
    for (std::size_t j = start; j <= cut; ++j) {
      const double x = radii[j];
      const double y = std::log(q[j] * std::sqrt(x));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    tail.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (std::abs(tail.fitted_slope + 1.0) > 0.02)
      fail(ErrorCode::TailUnresolved, "tail slope deviates from -1 by more than 2%");
    tail.coefficient = std::exp((sy + sx) / n);
    tail.r_start = radii[start];
    tail.valid = true;
    for (int j = static_cast<int>(cut) + 1; j <= nodes; ++j) {
      q[j] = tail_value(tail, radii[j]);
      dq[j] = -q[j] * (1.0 + 0.5 / radii[j]);
    }
  } else {
    tail.valid = false;
  }
  return RadialProfile(std::move(radii), std::move(q), std::move(dq), tail);
}

RadialProfile solve_townes(double tolerance, double r_max) {
  TownesOptions o;
  o.tolerance = tolerance;
  o.r_max = r_max;
  return solve_townes(o);
}

double moment(const RadialProfile& profile, double p) {
  require(p >= 0.0 && std::isfinite(p), "moment exponent must be >= 0");
  if (p == 0.0) return profile.mass();
  const auto& r = profile.radii();
  const auto& q = profile.q_values();
  const std::size_t n = r.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::pow(r[i], p + 1.0) * q[i] * q[i];
  const double h = r[1];
  bool uniform = (n - 1) % 2 == 0;
  for (std::size_t i = 1; i < n && uniform; ++i)
    uniform = std::abs(r[i] - i * h) <= 1e-9 * h * static_cast<double>(i);
  double s = uniform ? simpson(f, h) : trapezoid(r, f);
  if (profile.tail().valid) {
    const int k = 4000;
    const double ht = kTailSpan / k;
    std::vector<double> t(k + 1);
    for (int i = 0; i <= k; ++i) {
      const double x = profile.r_max() + i * ht;
      const double v = tail_value(profile.tail(), x);
      t[i] = std::pow(x, p + 1.0) * v * v;
    }
    s += simpson(t, ht);
  }
  return kTwoPi * s;
}

double lambda_of(const RadialProfile& profile, double p) {
  require(p > 0.0 && std::isfinite(p), "lambda_of needs p > 0");
  return std::pow(0.5 * p * moment(profile, p), 1.0 / (p + 2.0));
}

ScalarField sample_to_grid(const RadialProfile& profile, const Grid2D& grid, double lambda,
                           Point center, double* raw_mass) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::OutOfRange, "scale must be positive and finite");
  if (!grid.contains(center)) fail(ErrorCode::OutOfRange, "center lies outside the grid");
  const double L = grid.half_width();
  const double dx = L + std::abs(center.x), dy = L + std::abs(center.y);
  if (lambda * std::sqrt(dx * dx + dy * dy) > profile.r_max() && !profile.tail().valid)
    fail(ErrorCode::OutOfRange, "grid extends past the radial table and no tail is available");

  const double amp = lambda / std::sqrt(profile.mass());
  ScalarField u = sample(grid, [&](Point p) {
    return amp * profile.value(lambda * distance(p, center));
  });
  const double m = normalize(u);
  if (raw_mass) *raw_mass = m;
  return u;
}

std::string profile_to_json(const RadialProfile& profile) {
  nlohmann::json j;
  j["schema"] = "gpelab.townes/1";
  j["mesh"] = {{"r_max", profile.r_max()},
               {"intervals", profile.radii().size() - 1},
               {"radii", profile.radii()}};
  j["q"] = profile.q_values();
  j["dq"] = profile.q_prime();
  j["constants"] = {{"q0", profile.q0()},
                    {"mass", profile.mass()},
                    {"kinetic", profile.kinetic()},
                    {"quartic", profile.quartic()}};
  const auto& t = profile.tail();
  j["tail"] = {{"valid", t.valid},
               {"coefficient", t.coefficient},
               {"fitted_slope", t.fitted_slope},
               {"r_start", t.r_start},
               {"r_cut", t.r_cut}};
  return j.dump();
}

RadialProfile profile_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("profile JSON: ") + e.what());
  }
  if (j.value("schema", "") != "gpelab.townes/1")
    fail(ErrorCode::Parse, "unsupported profile schema");
  try {
    TailFit t;
    const auto& jt = j.at("tail");
    t.valid = jt.at("valid").get<bool>();
    t.coefficient = jt.at("coefficient").get<double>();
    t.fitted_slope = jt.at("fitted_slope").get<double>();
    t.r_start = jt.at("r_start").get<double>();
    t.r_cut = jt.at("r_cut").get<double>();
    RadialProfile p(j.at("mesh").at("radii").get<std::vector<double>>(),
                    j.at("q").get<std::vector<double>>(), j.at("dq").get<std::vector<double>>(), t);
    const double stored = j.at("constants").at("mass").get<double>();
    if (std::abs(p.mass() - stored) > 1e-12 * stored)
      fail(ErrorCode::Parse, "stored mass does not match the tabulated profile");
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("profile JSON: ") + e.what());
  }
}

const RadialProfile& reference_profile() {
  static const RadialProfile profile = solve_townes(TownesOptions{});
  return profile;
}

}  // namespace gpelab
