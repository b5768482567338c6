#include <cmath>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/numerics.hpp"

using namespace levyx;

TEST_CASE("normal cdf and inverse round-trip") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
    CHECK(norm_cdf(norm_inv(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto& rule = gauss_legendre(8);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 14);
  CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  const auto& odd = gauss_legendre(7);
  double w = 0.0;
  for (double x : odd.weights) w += x;
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive kronrod handles a peaked integrand") {
  auto r = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, 1e-10);
  CHECK(r.value == doctest::Approx(2.0 * std::atan(1.0 / 1e-2) / 1e-2).epsilon(1e-10));
}

TEST_CASE("brent root and golden section") {
  double r = find_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0, 1e-15);
  CHECK(r == doctest::Approx(0.7390851332151607).epsilon(1e-14));
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), NoRoot);
  double m = minimize_unimodal([](double x) { return (x - 0.3) * (x - 0.3); }, -2.0, 2.0, 1e-10);
  CHECK(m == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("compensated sum recovers small addends") {
  CompensatedSum<double> s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}
