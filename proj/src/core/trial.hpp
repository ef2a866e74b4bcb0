#pragma once

#include <vector>

#include "core/gpe.hpp"
#include "core/grid.hpp"
#include "core/townes.hpp"

namespace gpelab {

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t);
/// Radial cutoff: 1 on r <= 1, 0 on r >= 2.
double cutoff(double r);

/// Parameters of the cut-off trial family
///   phi_i(x) = A_i tau/sqrt(a*) cutoff(|y|/R) Q(tau |y|),
///   y = x - xbar_i + (-1)^i C0 (ln tau / tau) n.
struct TrialParams {
  double tau = 20.0;
  double R = 1.0;
  double C0 = 3.0;
  Point n{1.0, 0.0};
  Point xbar1{}, xbar2{};
};

/// Center of component i (1 or 2): xbar_i - (-1)^i C0 (ln tau / tau) n.
Point trial_center(const TrialParams& params, int component);
/// |A^{-2} - 1| from radial quadrature of cutoff^2 Q^2.
double normalization_defect(const TrialParams& params, const RadialProfile& profile);

/// One trial component, renormalized on the grid. Throws UnderResolved if 1/tau < 4h.
ScalarField build_trial_component(const TrialParams& params, int component,
                                  const RadialProfile& profile, const Grid2D& grid);
FieldPair build_trial_pair(const TrialParams& params, const RadialProfile& profile,
                           const Grid2D& grid);

/// Compact C-infinity bump of the given radius, unit mass on the grid.
ScalarField bump_field(const Grid2D& grid, Point center, double radius = 1.0);

struct TrialTerms {
  double tau = 0.0;
  double kinetic[2] = {0, 0};
  double potential[2] = {0, 0};
  double quartic[2] = {0, 0};
  double overlap = 0.0;
  double energy = 0.0;
};

TrialTerms trial_terms(const FieldPair& pair, const ProblemSpec& spec, double tau);

struct UnboundedConfig {
  double a1 = 0.0;
  double a2 = 0.0;
  double beta = 1.0;
  TrapSpec trap1{{-1.0, 0.0}, 2.0};
  TrapSpec trap2{{1.0, 0.0}, 2.0};
  /// Concentration point of the trial component (defaults to the trap minimum).
  Point xbar1{-1.0, 0.0};
  /// Center and radius of the fixed second component.
  Point eta_center{1.0, 0.0};
  double eta_radius = 1.0;
  double R = 1.0;
  double C0 = 3.0;
  Point n{1.0, 0.0};
  std::vector<double> taus{10.0, 20.0, 40.0};
};

struct LadderResult {
  std::vector<TrialTerms> rows;
  /// Ladder entries dropped because 1/tau < 4h.
  std::vector<double> skipped;
};

/// E(phi_1, eta) along the tau ladder for a1 >= a*. The ladder is truncated
/// (not failed) at the first unresolved tau; UnderResolved only if none fits.
LadderResult demonstrate_unbounded(const UnboundedConfig& config, const Grid2D& grid,
                                   const RadialProfile& profile);

/// Same-trap trial choice tau = d^{-1/(p+2)} (ln 1/d)^{p/(p+2)}, d = a* - a1.
double same_trap_tau(double astar, double a1, double p);

struct SameTrapConfig {
  double a1 = 0.0, a2 = 0.0;
  double p = 2.0;
  double beta = 1.0;
  Point x0{};
  double C0 = 3.0;
  Point n{1.0, 0.0};
  /// tau * R; the cutoff radius is R = tau_R / tau.
  double tau_R = 12.0;
};

struct SameTrapBound {
  double tau = 0.0;
  double energy = 0.0;
  TrialTerms terms;
  /// energy / [d^{p/(p+2)} (ln 1/d)^{2p/(p+2)}], d = a* - a1.
  double ratio = 0.0;
  double half_width = 0.0;
  int points = 0;
};

/// Grid large enough for the trial support and fine enough for 1/tau >= 8h.
Grid2D same_trap_grid(const SameTrapConfig& config, double tau);
SameTrapBound same_trap_upper_bound(const SameTrapConfig& config, const RadialProfile& profile);
SameTrapBound same_trap_upper_bound(const SameTrapConfig& config, const Grid2D& grid,
                                    const RadialProfile& profile);

/// f(s) = (a* - a)/kappa s^2 + m (ln s / s)^p on s > e^3.
struct LemmaAParams {
  double kappa = 1.0;
  double m = 1.0;
  double p = 2.0;
  double a = 0.0;
  double astar = 0.0;
};

double lemma_a_f(const LemmaAParams& params, double s);
double lemma_a_df(const LemmaAParams& params, double s);
double lemma_a_d2f(const LemmaAParams& params, double s);

struct LemmaAResult {
  double s1 = 0.0;
  double f_min = 0.0;
  int iterations = 0;
  /// f'' > 0 held at every Newton iterate.
  bool convex_at_iterates = true;
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  bool bracket_holds = false;
  double bound_ratio = 0.0;
};

/// Safeguarded Newton on f' = 0 over (e^3, inf). Throws OutOfRegime if the
/// minimum is not above e^3.
LemmaAResult lemma_a_minimize(const LemmaAParams& params);

}  // namespace gpelab
