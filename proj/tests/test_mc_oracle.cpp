#include <cmath>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/gaussian_reference.hpp"
#include "levyx/mc_oracle.hpp"

using namespace levyx;

namespace {

const LevyModel kGbm = make_model(GaussianParams{0.2}, 0.05);
const LevyModel kNig = make_model(NigParams{8.0, -2.0, 0.3}, 0.05);

}  // namespace

TEST_CASE("paths do not depend on the path count") {
  MonitoringSchedule s{0.0, {0.5, 1.0}};
  Eigen::MatrixXd small = simulate_monitoring(kNig, s, 5000, 11);
  Eigen::MatrixXd large = simulate_monitoring(kNig, s, 9000, 11);
  CHECK(small == large.topRows(5000));
  CHECK(simulate_monitoring(kNig, s, 100, 12) != small.topRows(100));
}

TEST_CASE("martingale and variance of simulated returns") {
  MonitoringSchedule s{0.0, {1.0}};
  for (const LevyModel* m : {&kGbm, &kNig}) {
    Eigen::VectorXd x = simulate_monitoring(*m, s, 400000, 5).col(0);
    Eigen::ArrayXd growth = x.array().exp();
    double mean = growth.mean();
    double sd = std::sqrt((growth - mean).square().mean() / growth.size());
    CHECK(std::abs(mean - std::exp(0.05)) < 4 * sd);
  }
  Eigen::VectorXd g = simulate_monitoring(kGbm, s, 400000, 6).col(0);
  double var = (g.array() - g.mean()).square().mean();
  CHECK(std::abs(var - 0.04) < 0.04 * 0.01);
}

TEST_CASE("vanilla estimate against the closed form") {
  Compound call{0.0, {{1.0, 100.0, 1}}};
  MCResult r = mc_price(call, kGbm, 100.0, 1'000'000, 1);
  CHECK(r.n_paths == 1'000'000);
  CHECK(std::abs(r.estimate - 10.450583572185565) < 4 * r.std_error);
  MCResult again = mc_price(call, kGbm, 100.0, 1'000'000, 1);
  CHECK(again.estimate == r.estimate);
}

TEST_CASE("unsupported inputs") {
  LevyModel cgmy = make_model(CgmyParams{1.0, 5.0, 5.0, 0.5}, 0.05);
  Compound call{0.0, {{1.0, 100.0, 1}}};
  CHECK_THROWS_AS(mc_price(call, cgmy, 100.0, 1000, 1), UnsupportedModel);
  Compound three{0.0, {{0.25, 1.0, 1}, {0.5, 5.0, 1}, {1.0, 100.0, 1}}};
  CHECK_THROWS_AS(mc_price(three, kGbm, 100.0, 1000, 1), NestingTooDeep);
}
