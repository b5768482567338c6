#include <chrono>
#include <cmath>

#include "doctest.h"
#include "levyx/digital_pricer.hpp"
#include "levyx/errors.hpp"

using namespace levyx;

namespace {

PayoffParameterSet one_date(double gamma, double a, int w, double k_log) {
  PayoffParameterSet p;
  p.gamma = Eigen::VectorXd::Constant(1, gamma);
  p.k_log = Eigen::VectorXd::Constant(1, k_log);
  p.w = Eigen::VectorXi::Constant(1, w);
  p.a = Eigen::MatrixXd::Constant(1, 1, a);
  return p;
}

const MonitoringSchedule kOneYear{0.0, {1.0}};

}  // namespace

TEST_CASE("aggregate exponent") {
  LevyModel m = make_model(GaussianParams{0.2}, 0.05);
  MonitoringSchedule s{0.0, {0.5, 1.5}};
  PayoffParameterSet p;
  p.gamma = Eigen::Vector2d(0.0, 1.0);
  p.k_log = Eigen::VectorXd::Zero(1);
  p.w = Eigen::VectorXi::Constant(1, 1);
  p.a = Eigen::MatrixXd(1, 2);
  p.a << -1.0, 1.0;
  cplx xi[1] = {cplx{0.3, -0.2}};
  cplx expected = -0.05 * 0.5 + 1.0 * m.psi(xi[0] - kI);
  CHECK(std::abs(psi_aggregate(m, s, p, xi) - expected) < 1e-14);
  cplx zero[1] = {0.0};
  CHECK(std::abs(psi_aggregate(m, s, p, zero) - cplx(-0.05 * 1.5)) < 1e-14);
}

TEST_CASE("default offsets") {
  LevyModel nig = make_model(NigParams{8.0, -2.0, 0.3}, 0.05);
  CHECK(default_offsets(nig, one_date(0.0, 1.0, 1, 0.0)).omega[0] == doctest::Approx(5.0));
  LevyModel g = make_model(GaussianParams{0.2}, 0.05);
  CHECK(default_offsets(g, one_date(1.0, 1.0, 1, 0.0)).omega[0] >= 0.25);
  // a call-type power digital with gamma = 11 needs Im below -11 < lambda_minus
  CHECK_THROWS_AS(default_offsets(nig, one_date(11.0, 1.0, 1, 0.0)), NoFeasibleOffsets);
}

TEST_CASE("one-period gaussian prices") {
  LevyModel m = make_model(GaussianParams{0.2}, 0.05);
  const double s = 100.0;
  auto sure = price_digital(m, kOneYear, one_date(0.0, 1.0, 1, -50.0), s);
  CHECK(sure.value == doctest::Approx(std::exp(-0.05)).epsilon(1e-9));
  auto power = price_digital(m, kOneYear, one_date(1.0, 1.0, 1, -50.0), s);
  CHECK(power.value == doctest::Approx(s).epsilon(1e-9));
  auto atm = price_digital(m, kOneYear, one_date(0.0, 1.0, 1, std::log(100.0)), s);
  // e^{-r} Phi(0.15)
  CHECK(atm.value == doctest::Approx(0.5323248154537634).epsilon(1e-9));
  auto put = price_digital(m, kOneYear, one_date(0.0, 1.0, -1, std::log(100.0)), s);
  CHECK(std::abs(atm.value + put.value - std::exp(-0.05)) < 1e-9);

  auto single = price_single_period(m, 0.0, 1.0, 0.0, 1.0, 1, std::log(100.0), s);
  CHECK(std::abs(single.value - atm.value) < 1e-9);
  auto single_sure = price_single_period(m, 0.0, 1.0, 1.0, 1.0, 1, -50.0, s);
  CHECK(single_sure.value == doctest::Approx(s).epsilon(1e-8));
  auto neg_a = price_single_period(m, 0.0, 1.0, 0.0, -1.0, 1, -std::log(110.0), s);
  auto put110 = price_single_period(m, 0.0, 1.0, 0.0, 1.0, -1, std::log(110.0), s);
  CHECK(std::abs(neg_a.value - put110.value) < 1e-9);
}

TEST_CASE("offset invariance and explicit offsets") {
  LevyModel m = make_model(NigParams{8.0, -2.0, 0.3}, 0.05);
  auto p = one_date(0.0, 1.0, 1, std::log(100.0));
  double prev = NAN, prev_err = 0.0;
  for (double w : {0.5, 2.0, 5.0}) {
    auto r = price_digital(m, kOneYear, p, 100.0, ContourOffsets{Eigen::VectorXd::Constant(1, w)});
    if (!std::isnan(prev)) CHECK(std::abs(r.value - prev) <= 10.0 * (r.quadrature_error + prev_err) + 1e-14);
    prev = r.value;
    prev_err = r.quadrature_error;
  }
  CHECK_THROWS_AS(price_digital(m, kOneYear, p, 100.0, ContourOffsets{Eigen::VectorXd::Constant(1, 11.0)}),
                  NoFeasibleOffsets);
}

TEST_CASE("two-condition digital and scaling") {
  LevyModel m = make_model(GaussianParams{0.25}, 0.03);
  MonitoringSchedule s{0.0, {0.5, 1.0}};
  PayoffParameterSet p;
  p.gamma = Eigen::Vector2d(0.0, 0.0);
  p.k_log = Eigen::Vector2d(std::log(95.0), std::log(105.0));
  p.w = Eigen::Vector2i(1, -1);
  p.a = Eigen::Matrix2d::Identity();
  auto base = price_digital(m, s, p, 100.0);
  PayoffParameterSet shifted = p;
  shifted.k_log.array() += std::log(2.0);
  auto scaled = price_digital(m, s, shifted, 200.0);
  CHECK(std::abs(base.value - scaled.value) < 1e-8);
  // monotone in the call-type strike
  PayoffParameterSet higher = p;
  higher.k_log[0] += 0.05;
  CHECK(price_digital(m, s, higher, 100.0).value <= base.value + 1e-10);
}

TEST_CASE("delta") {
  LevyModel m = make_model(GaussianParams{0.2}, 0.05);
  auto p = one_date(0.0, 1.0, 1, std::log(100.0));
  double d = delta(m, kOneYear, p, 100.0);
  double h = 1e-4 * 100.0;
  double fd = (price_digital(m, kOneYear, p, 100.0 + h).value -
               price_digital(m, kOneYear, p, 100.0 - h).value) / (2.0 * h);
  CHECK(d == doctest::Approx(fd).epsilon(1e-5));
  CHECK(std::abs(delta(m, kOneYear, one_date(0.0, 1.0, 1, -50.0), 100.0)) < 1e-10);
}

TEST_CASE("errors") {
  LevyModel m = make_model(GaussianParams{0.2}, 0.05);
  CHECK_THROWS_AS(price_digital(m, MonitoringSchedule{1.0, {0.5}}, one_date(0, 1, 1, 0), 100.0),
                  InvalidSchedule);
  auto bad = one_date(0, 1, 1, 0);
  bad.w[0] = 2;
  CHECK_THROWS_AS(price_digital(m, kOneYear, bad, 100.0), InvalidPayoff);
}
