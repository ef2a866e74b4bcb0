#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace gpelab {

template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + Alignment - 1) / Alignment) * Alignment;
    if (bytes == 0) bytes = Alignment;
    void* p = std::aligned_alloc(Alignment, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Alignment>&) const noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

using Complex = std::complex<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

namespace detail {
struct GridImpl;
}

/// Periodic square [-L, L)^2 sampled at N points per side, x_i = -L + i*h.
/// Cheap to copy; all copies share one immutable table of wavenumbers and
/// FFT plans, so a grid may be used from several threads at once.
class Grid2D {
 public:
  Grid2D(double half_width, int points_per_side);

  double half_width() const noexcept;
  int points_per_side() const noexcept;
  double spacing() const noexcept;
  std::size_t size() const noexcept;
  /// Number of complex coefficients of a real-to-complex transform, N*(N/2+1).
  std::size_t spectral_size() const noexcept;

  double coord(int i) const noexcept { return -half_width() + i * spacing(); }
  Point point(int ix, int iy) const noexcept { return {coord(ix), coord(iy)}; }
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(ix) * points_per_side() + iy;
  }

  /// Wavenumbers along one axis in FFT order; the Nyquist entry is -pi/h.
  std::span<const double> wavenumbers() const noexcept;
  /// |k|^2 for every coefficient of the real-to-complex layout.
  std::span<const double> k_squared() const noexcept;
  /// Parseval weight (1 or 2) of every coefficient of the real-to-complex layout.
  std::span<const double> parseval_weights() const noexcept;

  bool contains(Point p) const noexcept;
  bool same_as(const Grid2D& other) const noexcept;

  /// Unnormalized forward transform of `in` (size()) into `out` (spectral_size()).
  void forward(const double* in, Complex* out) const;
  /// Unnormalized inverse transform; `in` is overwritten.
  void inverse(Complex* in, double* out) const;

 private:
  std::shared_ptr<const detail::GridImpl> impl_;
};

/// A real N x N sample array tied to a grid; index = ix * N + iy.
class ScalarField {
 public:
  explicit ScalarField(Grid2D grid);
  ScalarField(Grid2D grid, double fill);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  double& at(int ix, int iy) noexcept { return values_[grid_.index(ix, iy)]; }
  double at(int ix, int iy) const noexcept { return values_[grid_.index(ix, iy)]; }
  std::size_t size() const noexcept { return values_.size(); }

  bool normalized() const noexcept { return normalized_; }
  void set_normalized(bool flag) noexcept { normalized_ = flag; }

  bool all_finite() const noexcept;
  double max_value() const noexcept;
  double max_abs() const noexcept;

 private:
  Grid2D grid_;
  AlignedVector<double> values_;
  bool normalized_ = false;
};

template <class F>
ScalarField sample(const Grid2D& grid, F&& fn) {
  ScalarField out(grid);
  const int n = grid.points_per_side();
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) out.at(ix, iy) = fn(grid.point(ix, iy));
  return out;
}

void require_same_grid(const ScalarField& a, const ScalarField& b);

/// h^2 * sum of samples (periodic trapezoid rule).
double integrate(const ScalarField& f);
/// h^2 * sum of f*g.
double inner(const ScalarField& f, const ScalarField& g);
double integrate_power(const ScalarField& f, int power);
/// Integral of f^2 evaluated from the spectrum (Parseval).
double spectral_norm_sq(const ScalarField& f);
/// Integral of |grad f|^2 = <f, -Laplacian f>, evaluated spectrally.
double gradient_sq_integral(const ScalarField& f);
ScalarField apply_laplacian(const ScalarField& f);
/// J(u) = int|grad u|^2 * int u^2 / int u^4, bounded below by a*/2.
double gn_quotient(const ScalarField& f);
/// Scales f in place to unit L2 mass and marks it normalized; returns the old mass.
double normalize(ScalarField& f);
/// Largest |f| on the outermost ring of samples divided by max |f|.
double boundary_ratio(const ScalarField& f);

}  // namespace gpelab
