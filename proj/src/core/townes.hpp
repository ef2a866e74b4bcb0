#pragma once

#include <string>
#include <vector>

#include "core/grid.hpp"

namespace gpelab {

/// Asymptotic tail Q(r) ~ coefficient * r^{-1/2} e^{-r}, fitted on the last
/// resolved decade of amplitudes.
struct TailFit {
  bool valid = false;
  double coefficient = 0.0;
  /// Free least-squares slope of log(r^{1/2} Q) against r over the fit window.
  double fitted_slope = 0.0;
  double r_start = 0.0;
  /// Last radius where the shooting solution is trusted; beyond it the tail is used.
  double r_cut = 0.0;
};

/// Positive radial ground state of -Lap Q + Q - Q^3 = 0 in the plane,
/// tabulated on a uniform mesh 0 = r_0 < ... < r_M = r_max.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(std::vector<double> radii, std::vector<double> q, std::vector<double> dq,
                TailFit tail);

  const std::vector<double>& radii() const noexcept { return radii_; }
  const std::vector<double>& q_values() const noexcept { return q_; }
  const std::vector<double>& q_prime() const noexcept { return dq_; }
  const TailFit& tail() const noexcept { return tail_; }

  double q0() const noexcept { return q_.front(); }
  double r_max() const noexcept { return radii_.back(); }
  double mass() const noexcept { return mass_; }
  double kinetic() const noexcept { return kinetic_; }
  double quartic() const noexcept { return quartic_; }

  /// Q(r) for any r >= 0: monotone cubic Hermite inside the table, the tail
  /// formula outside. Throws OutOfRange past r_max without a valid tail.
  double value(double r) const;

 private:
  std::vector<double> radii_, q_, dq_;
  // Hermite slopes after the monotonicity limiter.
  std::vector<double> slope_;
  TailFit tail_;
  double mass_ = 0.0, kinetic_ = 0.0, quartic_ = 0.0;
  double step_ = 0.0;
  bool uniform_ = false;
};

struct TownesOptions {
  double tolerance = 1e-10;
  double r_max = 20.0;
  /// Spacing of the output mesh.
  double step = 1e-3;
};

/// Shooting on Q(0) with bisection. Throws NoBracket / NotConverged / TailUnresolved.
RadialProfile solve_townes(const TownesOptions& options = {});
RadialProfile solve_townes(double tolerance, double r_max);

/// m_p = 2 pi int r^{p+1} Q^2 dr.
double moment(const RadialProfile& profile, double p);
/// ((p/2) m_p)^{1/(p+2)}.
double lambda_of(const RadialProfile& profile, double p);

/// x -> (lambda / sqrt(a*)) Q(lambda |x - center|), renormalized to unit mass.
/// `raw_mass`, if given, receives the grid mass before renormalization.
ScalarField sample_to_grid(const RadialProfile& profile, const Grid2D& grid, double lambda,
                           Point center = {}, double* raw_mass = nullptr);

/// Versioned JSON ("gpelab.townes/1") round trip.
std::string profile_to_json(const RadialProfile& profile);
RadialProfile profile_from_json(const std::string& text);

/// Process-wide profile solved once with default options; thread-safe.
const RadialProfile& reference_profile();

}  // namespace gpelab
