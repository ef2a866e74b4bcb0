#include "core/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace gpelab {

namespace {

// The FFTW planner is not thread-safe; execution of an existing plan on new
// arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

namespace detail {

struct GridImpl {
  double half_width = 0.0;
  int n = 0;
  double h = 0.0;
  std::vector<double> k;
  std::vector<double> ksq;
  std::vector<double> weights;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  GridImpl(double L, int N) : half_width(L), n(N), h(2.0 * L / N) {
    k.resize(N);
    const double dk = std::numbers::pi / L;
    for (int j = 0; j < N; ++j) k[j] = (j < N / 2 ? j : j - N) * dk;
    const int nc = N / 2 + 1;
    ksq.resize(static_cast<std::size_t>(N) * nc);
    weights.resize(ksq.size());
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < nc; ++j) {
        const double ky = std::abs(k[j]);
        ksq[static_cast<std::size_t>(i) * nc + j] = k[i] * k[i] + ky * ky;
        weights[static_cast<std::size_t>(i) * nc + j] = (j == 0 || j == N / 2) ? 1.0 : 2.0;
      }
    }
    AlignedVector<double> real(static_cast<std::size_t>(N) * N);
    AlignedVector<Complex> spec(ksq.size());
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_2d(N, N, real.data(), cspec, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_2d(N, N, cspec, real.data(), FFTW_ESTIMATE);
  }

  ~GridImpl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }

  GridImpl(const GridImpl&) = delete;
  GridImpl& operator=(const GridImpl&) = delete;
};

}  // namespace detail

Grid2D::Grid2D(double half_width, int points_per_side) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    fail(ErrorCode::InvalidArgument, "grid half width must be positive and finite");
  if (points_per_side < 32 || points_per_side % 2 != 0)
    fail(ErrorCode::InvalidArgument,
         "points per side must be even and >= 32, got " + std::to_string(points_per_side));
  impl_ = std::make_shared<const detail::GridImpl>(half_width, points_per_side);
}

double Grid2D::half_width() const noexcept { return impl_->half_width; }
int Grid2D::points_per_side() const noexcept { return impl_->n; }
double Grid2D::spacing() const noexcept { return impl_->h; }
std::size_t Grid2D::size() const noexcept {
  return static_cast<std::size_t>(impl_->n) * impl_->n;
}
std::size_t Grid2D::spectral_size() const noexcept { return impl_->ksq.size(); }
std::span<const double> Grid2D::wavenumbers() const noexcept { return impl_->k; }
std::span<const double> Grid2D::k_squared() const noexcept { return impl_->ksq; }
std::span<const double> Grid2D::parseval_weights() const noexcept { return impl_->weights; }

bool Grid2D::contains(Point p) const noexcept {
  const double L = impl_->half_width;
  return p.x >= -L && p.x < L && p.y >= -L && p.y < L;
}

bool Grid2D::same_as(const Grid2D& other) const noexcept {
  return impl_ == other.impl_ ||
         (impl_->n == other.impl_->n && impl_->half_width == other.impl_->half_width);
}

void Grid2D::forward(const double* in, Complex* out) const {
  auto* cout = reinterpret_cast<fftw_complex*>(out);
  if (fftw_alignment_of(const_cast<double*>(in)) == 0 &&
      fftw_alignment_of(reinterpret_cast<double*>(out)) == 0) {
    fftw_execute_dft_r2c(impl_->forward, const_cast<double*>(in), cout);
    return;
  }
  AlignedVector<double> a(in, in + size());
  AlignedVector<Complex> b(spectral_size());
  fftw_execute_dft_r2c(impl_->forward, a.data(), reinterpret_cast<fftw_complex*>(b.data()));
  std::copy(b.begin(), b.end(), out);
}

void Grid2D::inverse(Complex* in, double* out) const {
  auto* cin = reinterpret_cast<fftw_complex*>(in);
  if (fftw_alignment_of(reinterpret_cast<double*>(in)) == 0 && fftw_alignment_of(out) == 0) {
    fftw_execute_dft_c2r(impl_->inverse, cin, out);
    return;
  }
  AlignedVector<Complex> a(in, in + spectral_size());
  AlignedVector<double> b(size());
  fftw_execute_dft_c2r(impl_->inverse, reinterpret_cast<fftw_complex*>(a.data()), b.data());
  std::copy(b.begin(), b.end(), out);
}

ScalarField::ScalarField(Grid2D grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(Grid2D grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_value() const noexcept {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!a.grid().same_as(b.grid())) fail(ErrorCode::GridMismatch, "fields live on different grids");
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  const double h = f.grid().spacing();
  return s * h * h;
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  const auto a = f.values();
  const auto b = g.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  const double h = f.grid().spacing();
  return s * h * h;
}

double integrate_power(const ScalarField& f, int power) {
  double s = 0.0;
  for (double v : f.values()) {
    double p = 1.0;
    for (int k = 0; k < power; ++k) p *= v;
    s += p;
  }
  const double h = f.grid().spacing();
  return s * h * h;
}

namespace {

AlignedVector<Complex> spectrum(const ScalarField& f) {
  AlignedVector<Complex> out(f.grid().spectral_size());
  f.grid().forward(f.data(), out.data());
  return out;
}

}  // namespace

double spectral_norm_sq(const ScalarField& f) {
  const auto spec = spectrum(f);
  const auto w = f.grid().parseval_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) s += w[i] * std::norm(spec[i]);
  const double n2 = static_cast<double>(f.grid().size());
  const double h = f.grid().spacing();
  return s * h * h / n2;
}

double gradient_sq_integral(const ScalarField& f) {
  const auto spec = spectrum(f);
  const auto w = f.grid().parseval_weights();
  const auto ksq = f.grid().k_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) s += w[i] * ksq[i] * std::norm(spec[i]);
  const double n2 = static_cast<double>(f.grid().size());
  const double h = f.grid().spacing();
  return s * h * h / n2;
}

ScalarField apply_laplacian(const ScalarField& f) {
  auto spec = spectrum(f);
  const auto ksq = f.grid().k_squared();
  const double scale = -1.0 / static_cast<double>(f.grid().size());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= ksq[i] * scale;
  ScalarField out(f.grid());
  f.grid().inverse(spec.data(), out.data());
  return out;
}

double gn_quotient(const ScalarField& f) {
  const double quartic = integrate_power(f, 4);
  if (!(quartic > 1e-300)) fail(ErrorCode::ZeroField, "gn_quotient of a (numerically) zero field");
  return gradient_sq_integral(f) * integrate_power(f, 2) / quartic;
}

double normalize(ScalarField& f) {
  const double mass = integrate_power(f, 2);
  if (!(mass > 0.0)) fail(ErrorCode::ZeroField, "cannot normalize a zero field");
  const double s = 1.0 / std::sqrt(mass);
  for (double& v : f.values()) v *= s;
  f.set_normalized(true);
  return mass;
}

double boundary_ratio(const ScalarField& f) {
  const int n = f.grid().points_per_side();
  double edge = 0.0;
  for (int i = 0; i < n; ++i) {
    edge = std::max({edge, std::abs(f.at(0, i)), std::abs(f.at(n - 1, i)), std::abs(f.at(i, 0)),
                     std::abs(f.at(i, n - 1))});
  }
  const double peak = f.max_abs();
  return peak > 0.0 ? edge / peak : 0.0;
}

}  // namespace gpelab
