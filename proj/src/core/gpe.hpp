#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace gpelab {

/// Trap V(x) = |x - center|^p.
struct TrapSpec {
  Point center{};
  double p = 2.0;

  double operator()(Point x) const;
};

/// Couplings and traps of the two-component problem. Single-component runs
/// use a1 and trap1 only.
struct ProblemSpec {
  double a1 = 0.0, a2 = 0.0;
  double beta = 0.0;
  TrapSpec trap1{}, trap2{};

  /// Exchange (a1, trap1) <-> (a2, trap2).
  ProblemSpec swapped() const { return {a2, a1, beta, trap2, trap1}; }
};

struct FieldPair {
  ScalarField u1, u2;
};

enum class SolveStatus { Converged, NotConverged, CollapseDetected };
const char* status_name(SolveStatus s) noexcept;

enum class Method { ConjugateGradient, GradientFlow };

struct MinimizeOptions {
  Method method = Method::ConjugateGradient;
  /// Bound on the Euler-Lagrange residual (max norm on the support).
  double tolerance = 1e-6;
  /// Bound on the relative energy decrease of the last accepted step.
  double energy_tolerance = 1e-12;
  int max_iterations = 20000;
  /// Trial step of the first line search.
  double initial_step = 0.1;
  /// Width of the Gaussian seeds when no initial field is given.
  double seed_width = 1.0;
  /// Starting fields (one per component); overrides the Gaussian seeds.
  std::vector<ScalarField> initial;
  /// Extra seed offsets tried for coincident traps, as multiples of the first
  /// axis; component 1 is shifted by -d and component 2 by +d. The default
  /// +-2h seed is always tried.
  std::vector<double> extra_offsets;
  /// Record residual/energy every this many iterations (0: never).
  int history_stride = 50;
};

struct Checkpoint {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
};

struct SolveResult {
  std::vector<ScalarField> fields;  // one or two components
  double energy = 0.0;
  /// E^i = int|grad u_i|^2 + int V_i u_i^2 - (a_i/2) int u_i^4.
  double component_energy[2] = {0.0, 0.0};
  double kinetic[2] = {0.0, 0.0};
  double potential[2] = {0.0, 0.0};
  double quartic[2] = {0.0, 0.0};
  double interaction = 0.0;
  double mu[2] = {0.0, 0.0};
  /// |formula multiplier - <H u, u>| (the two agree up to rounding).
  double multiplier_discrepancy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::NotConverged;
  bool converged = false;
  /// Offset used for the seed that produced this result (coincident traps).
  double seed_offset = 0.0;
  std::vector<Checkpoint> history;

  std::size_t components() const noexcept { return fields.size(); }
};

double energy(const FieldPair& pair, const ProblemSpec& spec);
/// Single-component energy E_a with trap1.
double energy(const ScalarField& u, double a, const TrapSpec& trap);

SolveResult minimize_single(double a, const TrapSpec& trap, const Grid2D& grid,
                            const MinimizeOptions& options = {});
SolveResult minimize_pair(const ProblemSpec& spec, const Grid2D& grid,
                          const MinimizeOptions& options = {});

struct Multipliers {
  double mu1 = 0.0, mu2 = 0.0;
  double quotient1 = 0.0, quotient2 = 0.0;
};

/// mu_i = E^i - (a_i/2) int u_i^4 + beta int u1^2 u2^2, and <H_i u_i, u_i>.
Multipliers extract_multipliers(const FieldPair& pair, const ProblemSpec& spec);
/// Max norm of -Lap u_i + V_i u_i - mu_i u_i - a_i u_i^3 + beta u_j^2 u_i over
/// points where u_i > 1e-8 * peak, maximized over both components.
double euler_lagrange_residual(const FieldPair& pair, const ProblemSpec& spec,
                               const Multipliers& mu);

/// Unit-mass Gaussian exp(-|x-c|^2/(2 w^2)) / (sqrt(pi) w), sampled and renormalized.
ScalarField gaussian_seed(const Grid2D& grid, Point center, double width = 1.0);

}  // namespace gpelab
