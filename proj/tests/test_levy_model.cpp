#include <cmath>

#include "doctest.h"
#include "levyx/errors.hpp"
#include "levyx/levy_model.hpp"

using namespace levyx;

namespace {
const cplx kMinusI{0.0, -1.0};
}

TEST_CASE("gaussian exponent values") {
  LevyModel m = make_model(GaussianParams{0.2}, 0.05);
  CHECK(std::abs(m.psi(0.0)) < 1e-15);
  CHECK(std::abs(m.psi(kMinusI) - cplx(-0.05, 0.0)) < 1e-15);
  CHECK(std::abs(m.psi(1.0) - cplx(0.02, -0.03)) < 1e-15);
  CHECK(m.mu() == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(m.order() == 2.0);
}

TEST_CASE("nig strip and EMM condition") {
  LevyModel m = make_model(NigParams{8.0, -2.0, 0.3}, 0.05);
  CHECK(m.strip().lambda_minus == -10.0);
  CHECK(m.strip().lambda_plus == 6.0);
  CHECK(m.emm_residual() < 1e-12);
  CHECK(std::abs(m.psi(0.0)) < 1e-14);
  CHECK_THROWS_AS(m.psi(cplx{0.0, 6.5}), StripViolation);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(make_model(CgmyParams{1.0, 5.0, 0.9, 0.5}, 0.0), StripTooNarrow);
  CHECK_THROWS_AS(make_model(CgmyParams{1.0, 5.0, 3.0, 1.0}, 0.0), InvalidModel);
  CHECK_THROWS_AS(make_model(NigParams{2.0, 2.5, 0.3}, 0.0), InvalidModel);
  CHECK_THROWS_AS(make_model(NigParams{3.0, 2.5, 0.3}, 0.0), StripTooNarrow);
  CHECK_THROWS_AS(make_model(GaussianParams{-0.1}, 0.0), InvalidModel);
}

TEST_CASE("real-line properties for every family") {
  std::vector<LevyModel> models{make_model(GaussianParams{0.3}, 0.02),
                                make_model(NigParams{8.0, -2.0, 0.3}, 0.05),
                                make_model(CgmyParams{1.0, 5.0, 6.0, 0.5}, 0.03),
                                make_model(CgmyParams{0.5, 4.0, 8.0, 1.5}, 0.01)};
  for (const auto& m : models) {
    CAPTURE(m.kind());
    CHECK(m.emm_residual() < 1e-12);
    for (double x = -40.0; x <= 40.0; x += 0.37) {
      cplx v = m.psi(x);
      CHECK(std::abs(m.psi(-x) - std::conj(v)) < 1e-12 * (1.0 + std::abs(v)));
      CHECK(v.real() >= -1e-14);
    }
    // Re psi / |xi|^order settles towards the decay constant
    double prev_gap = 1e300;
    for (double x : {10.0, 100.0, 1000.0, 10000.0}) {
      double ratio = m.psi(x).real() / std::pow(x, m.order());
      CHECK(ratio > 0.0);
      double gap = std::abs(ratio - m.decay_constant()) / m.decay_constant();
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.05);
  }
}

TEST_CASE("esscher calibration") {
  LevyModel p = make_historic_model(GaussianParams{0.2}, 0.1, 0.05);
  EsscherResult q = esscher_calibrate(p, 0.05);
  CHECK(q.h == doctest::Approx(-1.75).epsilon(1e-12));
  CHECK(q.model.mu() == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(q.model.emm_residual() < 1e-12);

  LevyModel neutral = make_historic_model(GaussianParams{0.2}, 0.05 - 0.02, 0.05);
  EsscherResult q0 = esscher_calibrate(neutral, 0.05);
  CHECK(std::abs(q0.h) < 1e-12);

  LevyModel nig = make_historic_model(NigParams{8.0, -2.0, 0.3}, 0.08, 0.05);
  EsscherResult qn = esscher_calibrate(nig, 0.05);
  CHECK(qn.model.emm_residual() < 1e-12);
  // psi_Q(xi) = psi_P(xi - ih) - psi_P(-ih)
  cplx xi{0.7, -0.4};
  cplx expected = nig.psi(xi - kI * qn.h) - nig.psi(-kI * qn.h);
  CHECK(std::abs(qn.model.psi(xi) - expected) < 1e-10);
}
