#include <cmath>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/exotic_contracts.hpp"
#include "levyx/gaussian_reference.hpp"

using namespace levyx;

namespace {

const LevyModel kGbm = make_model(GaussianParams{0.2}, 0.05);
const LevyModel kNig = make_model(NigParams{8.0, -2.0, 0.3}, 0.05);

Compound vanilla(double strike, int w = 1) { return Compound{0.0, {{1.0, strike, w}}}; }

double price(const ContractSpec& c, const LevyModel& m, double spot = 100.0, double tol = 0.0) {
  PricingOptions o;
  o.tol = tol;
  return price_contract(c, m, spot, o).value;
}

}  // namespace

TEST_CASE("vanilla through the portfolio") {
  CHECK(std::abs(price(vanilla(100.0), kGbm) - 10.450583572185565) < 1e-7);
}

TEST_CASE("portfolio shapes") {
  auto fs = to_portfolio(ForwardStart{0.0, 0.5, 1.0, 1}, kGbm, 100.0);
  CHECK(fs.terms.size() == 2);
  CHECK(fs.terms[0].payoff.a.rows() == 1);

  auto asian = to_portfolio(AsianGeometric{{0.0, {0.5, 1.0}}, 100.0, 1, {3.0, 1.0}}, kGbm, 100.0);
  REQUIRE(asian.terms.size() == 2);
  CHECK(std::abs(asian.terms[0].payoff.a(0, 0) - 0.75) < 1e-15);
  CHECK(std::abs(asian.terms[0].payoff.a(0, 1) - 0.25) < 1e-15);

  auto barrier = to_portfolio(BarrierDownOutCall{{0.0, {0.5, 1.0}}, 90.0, 100.0}, kGbm, 100.0);
  CHECK(barrier.terms.size() == 2);
  CHECK(barrier.terms[0].payoff.a.isIdentity());
}

TEST_CASE("one-date contracts equal the vanilla") {
  double call = price(vanilla(100.0), kNig, 100.0, 1e-12);
  MonitoringSchedule one{0.0, {1.0}};
  CHECK(std::abs(price(AsianGeometric{one, 100.0, 1, {}}, kNig, 100.0, 1e-12) - call) < 1e-9);
  CHECK(std::abs(price(LookbackFixed{one, 100.0, 1}, kNig, 100.0, 1e-12) - call) < 1e-9);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate_contract(ForwardStart{0.0, 1.0, 0.5, 1}), InvalidContract);
  CHECK_THROWS_AS(validate_contract(Chooser{0.0, 1.0, 1.0, 100.0}), InvalidContract);
  CHECK_THROWS_AS(validate_contract(LookbackFixed{{0.0, {0.2, 0.4, 0.6, 0.8}}, 100.0, 1}),
                  CapExceeded);
  Compound deep{0.0, {{0.2, 1, 1}, {0.4, 1, 1}, {0.6, 1, 1}, {0.8, 100, 1}}};
  CHECK_THROWS_AS(validate_contract(deep), CapExceeded);
  CHECK_THROWS_AS(to_portfolio(AsianContinuous{0.0, 0.0, 1.0, 100.0, 1}, kGbm, 100.0),
                  UnsupportedContract);
}

TEST_CASE("compound thresholds") {
  Compound geske{0.0, {{0.5, 5.0, 1}, {1.0, 100.0, 1}}};
  auto th = solve_compound_thresholds(geske, kGbm);
  REQUIRE(th.size() == 2);
  CHECK(th[1] == 100.0);
  CHECK(std::abs(th[0] - 96.56237143219451) < 1e-6);
  CHECK(std::abs(price(geske, kGbm) - 6.5474192887675695) < 1e-5);

  // a zero outer strike is always exercised: the price is the inner option
  Compound free{0.0, {{0.5, 0.0, 1}, {1.0, 100.0, 1}}};
  CHECK(std::abs(price(free, kNig, 100.0, 1e-8) - price(vanilla(100.0), kNig, 100.0, 1e-12)) < 1e-5);
}

TEST_CASE("compound parity") {
  PricingOptions o;
  o.tol = 1e-8;
  CHECK(std::abs(compound_parity_check(kGbm, 0.0, 5.0, 0.5, 100.0, 1.0, 1, 100.0, o)) < 1e-6);
  CHECK(std::abs(compound_parity_check(kNig, 0.0, 5.0, 0.5, 100.0, 1.0, 1, 100.0, o)) < 1e-5);
}

TEST_CASE("continuous Asian exponent") {
  CHECK(std::abs(continuous_asian_psi(kNig, 0.0)) < 1e-15);
  // drift-free Gaussian part: sigma^2 xi^2 / 6 plus the drift halved
  cplx xi{0.7, -0.3};
  double mu = kGbm.mu();
  cplx expected = -kI * mu * xi / 2.0 + 0.04 * xi * xi / 6.0;
  CHECK(std::abs(continuous_asian_psi(kGbm, xi) - expected) < 1e-14);
}

TEST_CASE("continuous Asian price") {
  AsianContinuous c{0.0, 0.0, 1.0, 100.0, 1};
  CHECK(std::abs(price_asian_continuous(c, kGbm, 100.0).value - 5.546818633789217) < 1e-8);
  AsianContinuous later{0.0, 0.2, 1.0, 100.0, -1};
  CHECK(std::abs(price_asian_continuous(later, kGbm, 100.0).value -
                 closed_form_price(later, 0.2, 0.05, 100.0)) < 1e-8);
}

TEST_CASE("chooser agrees with its one-dimensional form") {
  Chooser c{0.0, 0.5, 1.0, 100.0};
  double full = price(c, kNig);
  CHECK(std::abs(full - price_chooser_simplified(c, kNig, 100.0).value) < 1e-4);
}

TEST_CASE("forward start is linear in spot") {
  ForwardStart c{0.0, 0.5, 1.0, -1};
  double v = price(c, kNig, 100.0);
  CHECK(std::abs(price(c, kNig, 200.0) - 2 * v) < 1e-10 * v);
}
