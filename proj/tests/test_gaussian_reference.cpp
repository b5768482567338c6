#include <cmath>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/gaussian_reference.hpp"

using namespace levyx;

// Reference values below were computed with scipy.stats.

TEST_CASE("bivariate normal") {
  CHECK(std::abs(bvn_cdf(1.0, 0.5, -0.3) - 0.5582063258240618) < 1e-12);
  CHECK(std::abs(bvn_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(bvn_cdf(0.3, 0.3, 1.0) - 0.6179114221889527) < 1e-10);
}

TEST_CASE("multivariate normal") {
  Eigen::MatrixXd c(3, 3);
  c << 1, 0.3, 0.2, 0.3, 1, -0.4, 0.2, -0.4, 1;
  CHECK(std::abs(mvn_cdf(Eigen::Vector3d(0.5, -0.2, 1.0), c) - 0.26125860284) < 1e-8);
  CHECK(std::abs(mvn_cdf(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()) - 0.125) < 1e-12);

  Eigen::MatrixXd eq = Eigen::MatrixXd::Constant(4, 4, 0.5);
  eq.diagonal().setOnes();
  CHECK(std::abs(mvn_cdf(Eigen::VectorXd::Zero(4), eq) - 0.2) < 1e-8);

  Eigen::VectorXd inf(2);
  inf << std::numeric_limits<double>::infinity(), 0.3;
  CHECK(std::abs(mvn_cdf(inf, Eigen::Matrix2d::Identity()) - 0.6179114221889527) < 1e-12);
}

TEST_CASE("correlation validation") {
  Eigen::Matrix2d bad;
  bad << 1, 1.2, 1.2, 1;
  CHECK_THROWS_AS(validate_correlation(bad), NotPSD);
  CHECK_THROWS_AS(validate_correlation(Eigen::MatrixXd::Identity(7, 7)), DimensionTooLarge);
}

TEST_CASE("contour side matches the normal probability") {
  Eigen::Matrix2d c;
  c << 1, 0.5, 0.5, 1;
  Eigen::Vector2d d(0.4, -0.7);
  Eigen::Vector2i w(1, -1);
  double v = lemma1_contour_side(d, c, w, Eigen::Vector2d(0.8, 1.1));
  Eigen::Matrix2d wcw;
  wcw << 1, -0.5, -0.5, 1;
  CHECK(std::abs(v - (-mvn_cdf(Eigen::Vector2d(0.4, 0.7), wcw))) < 1e-8);
}

TEST_CASE("closed forms") {
  const double s = 100, k = 100, r = 0.05, sigma = 0.2;
  CHECK(std::abs(black_scholes(s, k, 1.0, sigma, r, 1) - 10.450583572185565) < 1e-10);

  Compound geske{0.0, {{0.5, 5.0, 1}, {1.0, 100.0, 1}}};
  auto th = gaussian_compound_thresholds(geske, sigma, r);
  CHECK(std::abs(th[0] - 96.56237143219451) < 1e-7);
  CHECK(std::abs(closed_form_price(geske, sigma, r, s) - 6.5474192887675695) < 1e-8);

  Chooser chooser{0.0, 0.5, 1.0, k};
  CHECK(std::abs(closed_form_price(chooser, sigma, r, s) - 13.851329981702527) < 1e-9);

  AsianContinuous asian{0.0, 0.0, 1.0, k, 1};
  CHECK(std::abs(closed_form_price(asian, sigma, r, s) - 5.546818633789217) < 1e-10);

  AsianGeometric discrete{{0.0, {0.25, 0.5, 0.75, 1.0}}, k, 1, {}};
  CHECK(std::abs(closed_form_price(discrete, sigma, r, s) - 6.733487432526937) < 1e-10);

  ForwardStart fs{0.0, 0.5, 1.0, 1};
  CHECK(std::abs(closed_form_price(fs, sigma, r, s) - black_scholes(s, s, 0.5, sigma, r, 1)) <
        1e-10);
}

TEST_CASE("closed form limits") {
  LookbackFixed big{{0.0, {0.25, 0.5, 0.75, 1.0}}, 100.0, 1};
  CHECK_THROWS_AS(closed_form_price(big, 0.2, 0.05, 100.0), CapExceeded);
}
