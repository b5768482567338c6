#include <cmath>

#include "doctest.h"
#include "levyx/contour_quadrature.hpp"
#include "levyx/errors.hpp"

using namespace levyx;

namespace {
// Gaussian-kernel integrand exp(i xi.d - xi' C xi / 2) / prod xi
std::function<cplx(std::span<const cplx>)> gaussian_kernel(std::vector<double> d,
                                                          std::vector<std::vector<double>> c) {
  return [d, c](std::span<const cplx> xi) {
    cplx e = 0.0, prod = 1.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      e += kI * xi[k] * d[k];
      prod *= xi[k];
      for (std::size_t j = 0; j < xi.size(); ++j) e -= 0.5 * c[k][j] * xi[k] * xi[j];
    }
    return std::exp(e) / prod;
  };
}
}  // namespace

TEST_CASE("truncation radius") {
  // independent bisection of exp(-0.02 L^2) = 1e-10 / (1 + L)
  CHECK(truncation_radius(0.02, 2.0, 1.0, 1e-10) == doctest::Approx(36.50362204362919).epsilon(1e-9));
  CHECK(truncation_radius(0.02, 2.0, 1.0, 1.0) == 1.0);
  CHECK(truncation_radius(0.02, 2.0, 2.0, 1e-10) < truncation_radius(0.02, 2.0, 1.0, 1e-10));
  CHECK_THROWS_AS(truncation_radius(0.0, 2.0, 1.0, 1e-8), NonPositiveInput);
}

TEST_CASE("one-dimensional lines") {
  auto f = [](double d) {
    return [d](cplx xi) { return std::exp(kI * xi * d - 0.5 * xi * xi) / xi; };
  };
  auto r0 = integrate_line(f(0.0), -1.0, 40.0, 1e-12);
  CHECK(r0.converged);
  CHECK(std::abs(r0.value / (kTwoPi * kI) - 0.5) < 1e-11);
  auto r1 = integrate_line(f(1.0), -1.0, 40.0, 1e-12);
  CHECK(std::abs(r1.value - kTwoPi * kI * 0.8413447460685429) < 1e-10);
  auto r2 = integrate_line(f(1.0), 1.0, 40.0, 1e-12);
  CHECK(std::abs(r2.value + kTwoPi * kI * 0.15865525393145707) < 1e-10);
}

TEST_CASE("tensor grids on the Gaussian family") {
  auto norm = [](const QuadratureResult& r, int n) { return r.value / std::pow(kTwoPi * kI, n); };
  ContourSpec two{{-1.0, -1.0}, {12.0, 12.0}, {16, 16}};
  auto r = integrate_tensor(gaussian_kernel({0, 0}, {{1, 0}, {0, 1}}), two, 1e-10);
  CHECK(std::abs(norm(r, 2) - 0.25) < 1e-9);
  auto rho = integrate_tensor(gaussian_kernel({0, 0}, {{1, 0.5}, {0.5, 1}}), two, 1e-10);
  // brute-force density quadrature oracle: P(Z1 <= 0, Z2 <= 0) with rho = 0.5
  CHECK(std::abs(norm(rho, 2) - 1.0 / 3.0) < 1e-9);
  ContourSpec three{{-1.0, -1.0, -1.0}, {12.0, 12.0, 12.0}, {16, 16, 16}};
  auto r3 = integrate_tensor(gaussian_kernel({0, 0, 0}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), three,
                             1e-9);
  CHECK(std::abs(norm(r3, 3) - 0.125) < 1e-8);
  CHECK_THROWS_AS(integrate_tensor(gaussian_kernel({0, 0, 0, 0, 0}, {}),
                                   ContourSpec{{-1, -1, -1, -1, -1}, {5, 5, 5, 5, 5}, {16, 16, 16, 16, 16}},
                                   1e-6),
                  DimensionTooLarge);
}

TEST_CASE("refinement, determinism and input checks") {
  auto f = gaussian_kernel({0.3, -0.2}, {{1, 0.2}, {0.2, 1}});
  ContourSpec spec{{-0.7, -1.1}, {12.0, 12.0}, {16, 16}};
  double prev = 1e300;
  for (int cap : {32, 64, 128}) {
    auto r = integrate_tensor(f, spec, 0.0, cap);
    CHECK(r.error_estimate <= prev);
    prev = r.error_estimate;
  }
  auto a = integrate_tensor(f, spec, 1e-10);
  auto b = integrate_tensor(f, spec, 1e-10);
  CHECK(a.value == b.value);
  CHECK_THROWS_AS(integrate_tensor(f, ContourSpec{{0.0, -1.0}, {12, 12}, {16, 16}}, 1e-8),
                  InvalidContour);
  CHECK_THROWS_AS(integrate_line([](cplx) { return cplx{NAN, 0.0}; }, -1.0, 5.0, 1e-8),
                  NaNEncountered);
}

TEST_CASE("hermitian half grid matches the full grid") {
  auto f = gaussian_kernel({0.3, -0.2, 0.1}, {{1, 0.2, 0.1}, {0.2, 1, 0.3}, {0.1, 0.3, 1}});
  ContourSpec spec{{-0.7, 1.1, -0.5}, {10.0, 10.0, 10.0}, {40, 40, 40}};
  QuadratureOptions full, half;
  full.tol = half.tol = 1.0;
  half.hermitian = true;
  struct Adapter : LineIntegrand {
    std::function<cplx(std::span<const cplx>)> f;
    const std::vector<std::vector<cplx>>* nodes = nullptr;
    void set_grid(const std::vector<std::vector<cplx>>& n) override { nodes = &n; }
    void eval_line(std::span<const int> outer, std::span<cplx> out) const override {
      std::vector<cplx> xi{0.0, (*nodes)[1][outer[0]], (*nodes)[2][outer[1]]};
      for (std::size_t k = 0; k < out.size(); ++k) {
        xi[0] = (*nodes)[0][k];
        out[k] = f(xi);
      }
    }
  } adapter;
  adapter.f = f;
  auto a = integrate_lines(adapter, spec, full);
  auto b = integrate_lines(adapter, spec, half);
  CHECK(std::abs(a.value - b.value) < 1e-12);
  CHECK(b.evaluations < a.evaluations);
}
