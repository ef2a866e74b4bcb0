#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/grid.hpp"
#include "doctest.h"

using namespace gpelab;

namespace {
constexpr double kPi = std::numbers::pi;

ScalarField gaussian(const Grid2D& g, double width = 1.0, Point c = {}) {
  return sample(g, [&](Point p) {
    const double r2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
    return std::exp(-r2 / (2.0 * width * width));
  });
}
}  // namespace

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid2D(0.0, 64), Error);
  CHECK_THROWS_AS(Grid2D(1.0, 63), Error);
  CHECK_THROWS_AS(Grid2D(1.0, 16), Error);
  CHECK_NOTHROW(Grid2D(1.0, 32));
}

TEST_CASE("coordinates and wavenumbers") {
  Grid2D g(4.0, 64);
  CHECK(g.spacing() == doctest::Approx(0.125));
  CHECK(g.coord(0) == -4.0);
  CHECK(g.coord(32) == doctest::Approx(0.0));
  auto k = g.wavenumbers();
  CHECK(k[1] == doctest::Approx(kPi / 4.0));
  CHECK(k[32] == doctest::Approx(-kPi / g.spacing()));
  CHECK(g.spectral_size() == 64u * 33u);
}

TEST_CASE("gaussian integrals") {
  Grid2D g(12.0, 256);
  auto u = gaussian(g);
  CHECK(std::abs(integrate(u) - 2.0 * kPi) < 1e-10);
  CHECK(std::abs(integrate_power(u, 2) - kPi) < 1e-10);
  CHECK(std::abs(gradient_sq_integral(u) - kPi) < 1e-8);
  CHECK(std::abs(gn_quotient(u) - 2.0 * kPi) < 1e-8);
}

TEST_CASE("parseval matches the quadrature") {
  Grid2D g(6.0, 96);
  auto u = sample(g, [](Point p) { return std::exp(-p.x * p.x - 0.5 * p.y * p.y) * (1.0 + 0.3 * p.x); });
  CHECK(std::abs(spectral_norm_sq(u) - integrate_power(u, 2)) < 1e-12);
}

TEST_CASE("laplacian of a gaussian") {
  Grid2D g(12.0, 256);
  auto u = gaussian(g);
  auto lap = apply_laplacian(u);
  double err = 0.0;
  for (int ix = 0; ix < 256; ++ix)
    for (int iy = 0; iy < 256; ++iy) {
      Point p = g.point(ix, iy);
      const double r2 = p.x * p.x + p.y * p.y;
      err = std::max(err, std::abs(lap.at(ix, iy) - (r2 - 2.0) * std::exp(-r2 / 2.0)));
    }
  CHECK(err < 1e-6);
  // <u, -Lap u> agrees with the spectral kinetic energy
  CHECK(std::abs(-inner(u, lap) - gradient_sq_integral(u)) < 1e-10);
}

TEST_CASE("quotient is invariant under mass and length scaling") {
  Grid2D g(12.0, 256);
  auto a = gaussian(g, 1.0);
  auto b = gaussian(g, 1.5);
  for (double& v : b.values()) v *= 3.7;
  CHECK(gn_quotient(a) == doctest::Approx(gn_quotient(b)).epsilon(1e-8));
}

TEST_CASE("normalize and boundary ratio") {
  Grid2D g(12.0, 128);
  auto u = gaussian(g);
  const double m = normalize(u);
  CHECK(m == doctest::Approx(kPi));
  CHECK(u.normalized());
  CHECK(integrate_power(u, 2) == doctest::Approx(1.0));
  CHECK(boundary_ratio(u) < 1e-20);
  ScalarField z(g);
  CHECK_THROWS_AS(normalize(z), Error);
  CHECK_THROWS_AS(gn_quotient(z), Error);
}

TEST_CASE("mixing grids is an error") {
  Grid2D a(4.0, 64), b(4.0, 128);
  ScalarField u(a, 1.0), v(b, 1.0);
  try {
    (void)inner(u, v);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
  CHECK(a.same_as(Grid2D(4.0, 64)));
}
