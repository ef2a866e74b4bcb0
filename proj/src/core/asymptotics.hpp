#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/gpe.hpp"
#include "core/grid.hpp"
#include "core/townes.hpp"

namespace gpelab {

struct Peak {
  Point location{};
  double value = 0.0;
  /// Strict local maxima above half the global maximum.
  int count = 0;
  /// False if the 3x3 quadratic fit was degenerate and the raw argmax was kept.
  bool refined = false;
};

/// Global argmax refined by a quadratic fit of ln u on the 3x3 stencil.
Peak find_peak(const ScalarField& field);

struct ProfileFit {
  double lambda = 0.0;
  /// H1 distance between eps*u(eps x + peak) and (lambda/sqrt(a*)) Q(lambda|x|).
  double distance = 0.0;
  double l2_distance = 0.0;
};

/// Fits lambda by golden section on the L2 distance of the rescaled field to
/// the scaled ground state. Throws UnderResolved if 2 eps / h < 8.
ProfileFit rescaled_profile_distance(const ScalarField& field, double eps, Point peak,
                                     const RadialProfile& profile);

/// Exponential decay rate of the field around `peak`, in units rescaled by eps
/// (eps = 1: physical units). Fitted on samples between 1e-10 and 1e-3 of the peak;
/// the lower end is raised to 10x the level on the outer ring of the grid.
double decay_rate(const ScalarField& field, Point peak, double eps = 1.0);

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
  bool accepted = false;
};

/// Least squares on (ln x, ln y) over the last `window` points (0: all).
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::size_t window = 0, double r2_gate = 0.98);

enum class SweepMode { Single, Pair };

/// One schedule point. Component-2 columns are NaN in single mode.
struct SweepRecord {
  int index = 0;
  double a1 = 0.0, a2 = 0.0, beta = 0.0, p1 = 2.0, p2 = 2.0;
  /// "converged", "not_converged", "collapse_detected" or an error code name.
  std::string status;
  bool ok = false;
  bool under_resolved = false;
  double half_width = 0.0;
  int points = 0;
  int iterations = 0;
  double residual = 0.0;
  double eps1 = 0.0, eps2 = 0.0;
  double quartic1 = 0.0, quartic2 = 0.0;
  double eps_tilde1 = 0.0, eps_tilde2 = 0.0;
  double e = 0.0, E1 = 0.0, E2 = 0.0;
  double e1 = 0.0, e2 = 0.0;
  double overlap = 0.0;
  /// e - e1 - e2 - beta * overlap.
  double sandwich_slack = 0.0;
  double mu1 = 0.0, mu2 = 0.0;
  Point peak1{}, peak2{};
  int peak_count1 = 0, peak_count2 = 0;
  bool peak_refined1 = false, peak_refined2 = false;
  double lambda_fit1 = 0.0, lambda_fit2 = 0.0;
  double profile_dist1 = 0.0, profile_dist2 = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
};

/// Recomputes eps_i, eps_tilde_i and sandwich_slack from the stored primaries.
void derive_columns(SweepRecord& record, double astar);

struct GridPolicy {
  double half_width = 8.0;
  int points = 256;
  int max_points = 1024;
  /// Required cells across the predicted core eps/lambda.
  double cells_per_core = 4.0;
  bool auto_refine = true;
};

struct SweepConfig {
  SweepMode mode = SweepMode::Pair;
  /// (a1, a2) per point; a2 is ignored in single mode.
  std::vector<std::pair<double, double>> schedule;
  /// Traps and beta; the couplings are taken from the schedule.
  ProblemSpec problem;
  GridPolicy grid;
  MinimizeOptions solver;
  /// Start each point from the previous point's minimizer (same grid only).
  bool warm_start = true;
  /// Worker threads; only used without warm start.
  int jobs = 1;
};

/// Grid chosen for one schedule point, after auto-refinement.
struct GridChoice {
  double half_width = 0.0;
  int points = 0;
  bool under_resolved = false;
};
GridChoice choose_grid(const GridPolicy& policy, double a1, double a2, double p1, double p2,
                       SweepMode mode, const RadialProfile& profile);

std::vector<SweepRecord> run_sweep(const SweepConfig& config, const RadialProfile& profile);

enum class LRegime { Zero, Finite, Infinite };
const char* regime_name(LRegime r) noexcept;

struct LThresholds {
  double zero_below = 0.5;
  double infinite_above = 2.0;
};

struct LClassification {
  LRegime regime = LRegime::Finite;
  /// Last value of exp(-delta0/eps1)/eps2^p2; meaningless when infinite.
  double estimate = 0.0;
  bool infinite = false;
  /// Value ratio over the last three points.
  double trend = 1.0;
  std::vector<double> values;
};

LClassification classify_L(const std::vector<SweepRecord>& records, double delta0,
                           const LThresholds& thresholds = {});

struct Sandwich {
  double lo = 0.0, hi = 0.0;
  /// Largest K with all eps_i^2 int u_i^4 in [K, 1/K].
  double K = 0.0;
};
Sandwich l4_sandwich(const std::vector<SweepRecord>& records);

struct Theorem2Options {
  Point x1{-1.0, 0.0}, x2{1.0, 0.0};
  double tolerance = 1e-6;
  std::size_t last = 3;
  double ratio_bound = 0.5;
  double distance_bound = 0.05;
  double lambda_rel = 0.1;
  double lambda_expected = 0.0;  // 0: skip the lambda check
  LThresholds thresholds;
};

struct Theorem2Row {
  double ratio1 = 0.0, ratio2 = 0.0;
  double slack = 0.0;
  bool sandwich_ok = false;
};

struct Theorem2Report {
  std::vector<Theorem2Row> rows;
  LClassification L;
  double delta0 = 0.0;
  bool sandwich_ok = false;
  bool ratio1_decreasing = false;
  bool ratio1_small = false;
  bool component2_checked = false;
  bool ratio2_decreasing = true;
  bool ratio2_small = true;
  bool distance_ok = false;
  bool lambda_ok = true;
  bool single_peak = false;
  bool passed = false;
  std::vector<std::string> failures;
};

Theorem2Report theorem2_diagnostics(const std::vector<SweepRecord>& records,
                                    const Theorem2Options& options = {});

struct Theorem3Options {
  Point x0{};
  double drift_bound = 10.0;
};

struct Theorem3Row {
  double sep1 = 0.0, sep2 = 0.0;
  double drift1 = 0.0, drift2 = 0.0;
};

struct Theorem3Report {
  std::vector<Theorem3Row> rows;
  /// False for beta = 0 (the separation claim needs repulsion).
  bool applicable = false;
  bool sep_increasing = false;
  double drift_max = 0.0;
  bool drift_ok = false;
  bool passed = false;
  std::vector<std::string> failures;
};

Theorem3Report theorem3_diagnostics(const std::vector<SweepRecord>& records,
                                    const Theorem3Options& options = {});

}  // namespace gpelab
