#include "levyx/validation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "levyx/gaussian_reference.hpp"
#include "levyx/mc_oracle.hpp"
#include "levyx/spec_io.hpp"

namespace levyx {

using nlohmann::json;

json SuiteReport::to_json() const {
  json out = {{"suite", suite},
              {"cases", cases},
              {"passed", passed},
              {"max_violation", max_violation},
              {"seconds", seconds}};
  if (!first_failure.is_null()) out["first_failure"] = first_failure;
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accumulates case outcomes. `measured` is compared against `limit`.
struct Tally {
  SuiteReport report;

  void add(bool ok, double measured, json inputs) {
    ++report.cases;
    if (std::isfinite(measured)) {
      report.max_violation = std::max(report.max_violation, measured);
    } else {
      report.max_violation = std::numeric_limits<double>::infinity();
    }
    if (ok) {
      ++report.passed;
    } else if (report.first_failure.is_null()) {
      inputs["measured"] = measured;
      report.first_failure = std::move(inputs);
    }
  }

  void check(double measured, double limit, json inputs) {
    inputs["limit"] = limit;
    add(measured <= limit, measured, std::move(inputs));
  }

  // Records an exception as a failed case.
  void error(const std::exception& e, json inputs) {
    inputs["error"] = e.what();
    add(false, std::numeric_limits<double>::infinity(), std::move(inputs));
  }
};

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

json model_json(const ModelParams& p, double r) { return to_json(ModelSpec{p, r, std::nullopt}); }

MonitoringSchedule even_schedule(double t, double expiry, int m) {
  MonitoringSchedule s;
  s.t = t;
  for (int j = 1; j <= m; ++j) s.dates.push_back(t + (expiry - t) * j / m);
  return s;
}

CompoundLeg leg(double expiry, double strike) { return CompoundLeg{expiry, strike, 1}; }

ContractSpec vanilla(double expiry, double strike, int w = 1) {
  return Compound{0.0, {CompoundLeg{expiry, strike, w}}};
}

DigitalContract digital(double expiry, double strike, int w) {
  DigitalContract c;
  c.schedule.dates = {expiry};
  c.payoff.gamma = Eigen::VectorXd::Zero(1);
  c.payoff.k_log = Eigen::VectorXd::Constant(1, std::log(strike));
  c.payoff.w = Eigen::VectorXi::Constant(1, w);
  c.payoff.a = Eigen::MatrixXd::Ones(1, 1);
  return c;
}

const ModelParams kNig = NigParams{8.0, -2.0, 0.3};
// y = 1.5 keeps multi-dimensional grids small; y = 0.5 appears in the
// one-dimensional and parity cases.
const ModelParams kCgmyFast = CgmyParams{0.05, 5.0, 5.0, 1.5};
const ModelParams kCgmySlow = CgmyParams{1.0, 5.0, 5.0, 0.5};

// Random correlation matrix with smallest eigenvalue >= 0.2.
Eigen::MatrixXd random_correlation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  for (;;) {
    Eigen::MatrixXd g(n, n + 2);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
    Eigen::MatrixXd c = g * g.transpose();
    Eigen::VectorXd s = c.diagonal().cwiseSqrt().cwiseInverse();
    c = s.asDiagonal() * c * s.asDiagonal();
    c.diagonal().setOnes();
    if (n == 1 || Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() >= 0.2)
      return c;
  }
}

SuiteReport lemma1_suite() {
  Tally tally;
  for (int n = 1; n <= 3; ++n) {
    std::mt19937_64 rng(20240 + n);
    std::uniform_real_distribution<double> ud(-2.0, 2.0), uo(0.3, 1.5), coin(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd c = random_correlation(n, rng);
      Eigen::VectorXd d(n), omega(n);
      Eigen::VectorXi w(n);
      for (int i = 0; i < n; ++i) {
        d[i] = ud(rng);
        w[i] = coin(rng) < 0.5 ? -1 : 1;
        omega[i] = uo(rng);
      }
      json inputs = {{"n", n},
                     {"case", k},
                     {"d", std::vector<double>(d.data(), d.data() + n)},
                     {"w", std::vector<int>(w.data(), w.data() + n)},
                     {"omega", std::vector<double>(omega.data(), omega.data() + n)}};
      try {
        double contour = lemma1_contour_side(d, c, w, omega, n <= 2 ? 1e-9 : 1e-6);
        Eigen::VectorXd wd = w.cast<double>().cwiseProduct(d);
        Eigen::MatrixXd wcw = w.cast<double>().asDiagonal() * c * w.cast<double>().asDiagonal();
        double sign = w.prod();
        double expected = sign * mvn_cdf(wd, wcw);
        tally.check(std::abs(contour - expected), n <= 2 ? 1e-6 : 1e-4, std::move(inputs));
      } catch (const std::exception& e) {
        tally.error(e, std::move(inputs));
      }
    }
  }
  return tally.report;
}

SuiteReport gaussian_suite() {
  Tally tally;
  const double strike = 100.0, expiry = 1.0;
  PricingOptions one_d, multi_d;
  one_d.tol = 1e-12;
  multi_d.tol = 1e-8;
  for (double sigma : {0.1, 0.2, 0.4}) {
    for (double r : {0.0, 0.05}) {
      LevyModel model = make_model(GaussianParams{sigma}, r);
      for (double ratio : {0.8, 1.0, 1.25}) {
        double spot = ratio * strike;
        std::vector<std::pair<ContractSpec, bool>> cases;  // contract, one-dimensional
        cases.emplace_back(digital(expiry, strike, 1), true);
        cases.emplace_back(ForwardStart{0.0, 0.5, expiry, 1}, true);
        cases.emplace_back(AsianGeometric{even_schedule(0.0, expiry, 4), strike, 1, {}}, true);
        cases.emplace_back(Chooser{0.0, 0.5, expiry, strike}, false);
        // compound strikes at half the value of the underlying option keep
        // every layer away from zero
        double k2 = 0.5 * black_scholes(spot, strike, expiry, sigma, r, 1);
        Compound two{0.0, {leg(0.5, k2), leg(expiry, strike)}};
        double k1 = 0.5 * closed_form_price(two, sigma, r, spot);
        Compound three{0.0, {leg(0.25, k1), leg(0.5, k2), leg(expiry, strike)}};
        cases.emplace_back(two, false);
        cases.emplace_back(three, false);
        for (int m : {2, 3}) {
          cases.emplace_back(BarrierDownOutCall{even_schedule(0.0, expiry, m), 0.85 * spot, strike},
                             false);
          cases.emplace_back(LookbackFixed{even_schedule(0.0, expiry, m), strike, 1}, false);
        }
        for (const auto& [contract, one] : cases) {
          json inputs = {{"model", model_json(GaussianParams{sigma}, r)},
                         {"spot", spot},
                         {"contract", to_json(contract)}};
          try {
            double fourier = price_contract(contract, model, spot, one ? one_d : multi_d).value;
            double exact = closed_form_price(contract, sigma, r, spot);
            inputs["fourier"] = fourier;
            inputs["closed_form"] = exact;
            tally.check(rel_err(fourier, exact), one ? 1e-6 : 1e-4, std::move(inputs));
          } catch (const std::exception& e) {
            tally.error(e, std::move(inputs));
          }
        }
      }
    }
  }
  return tally.report;
}

SuiteReport parity_suite() {
  struct Case {
    ModelParams params;
    double r, k1, t1, k2, t2;
    int w2;
    double limit;
  };
  const std::vector<Case> cases = {
      {GaussianParams{0.2}, 0.05, 5.0, 0.5, 100.0, 1.0, 1, 1e-6},
      {GaussianParams{0.3}, 0.02, 3.0, 0.25, 90.0, 0.75, -1, 1e-6},
      {kNig, 0.05, 5.0, 0.5, 100.0, 1.0, 1, 1e-5},
      {NigParams{15.0, 3.0, 0.5}, 0.03, 4.0, 0.4, 110.0, 1.0, -1, 1e-5},
      {kCgmySlow, 0.05, 5.0, 0.5, 100.0, 1.0, 1, 1e-5},
      {kCgmyFast, 0.04, 3.0, 0.3, 95.0, 0.8, -1, 1e-5},
  };
  const double spot = 100.0;
  PricingOptions options;
  options.tol = 1e-8;
  Tally tally;
  for (const auto& c : cases) {
    json inputs = {{"model", model_json(c.params, c.r)}, {"spot", spot}, {"k1", c.k1},
                   {"t1", c.t1}, {"k2", c.k2}, {"t2", c.t2}, {"w2", c.w2}};
    try {
      LevyModel model = make_model(c.params, c.r);
      double residual =
          compound_parity_check(model, 0.0, c.k1, c.t1, c.k2, c.t2, c.w2, spot, options);
      tally.check(std::abs(residual), c.limit, std::move(inputs));
    } catch (const std::exception& e) {
      tally.error(e, std::move(inputs));
    }
  }
  return tally.report;
}

SuiteReport mc_suite() {
  const double spot = 100.0, strike = 100.0, r = 0.05;
  const int runs = 20;
  const std::int64_t paths = 1'000'000;
  std::vector<ContractSpec> contracts = {
      digital(1.0, strike, 1),
      ForwardStart{0.0, 0.5, 1.0, 1},
      AsianGeometric{even_schedule(0.0, 1.0, 4), strike, 1, {}},
      Chooser{0.0, 0.5, 1.0, strike},
      BarrierDownOutCall{even_schedule(0.0, 1.0, 3), 90.0, strike},
      LookbackFixed{even_schedule(0.0, 1.0, 3), strike, 1},
  };
  Tally tally;
  for (const ModelParams& params : {ModelParams{GaussianParams{0.2}}, kNig}) {
    LevyModel model = make_model(params, r);
    for (const auto& contract : contracts) {
      json inputs = {{"model", model_json(params, r)},
                     {"spot", spot},
                     {"contract", to_json(contract)},
                     {"paths", paths}};
      try {
        double fourier = price_contract(contract, model, spot).value;
        int outside = 0;
        std::vector<double> z;
        for (int seed = 1; seed <= runs; ++seed) {
          MCResult mc = mc_price(contract, model, spot, paths, seed);
          double score = std::abs(mc.estimate - fourier) / mc.std_error;
          z.push_back(score);
          if (score > 3.0) ++outside;
        }
        inputs["fourier"] = fourier;
        inputs["z_scores"] = z;
        // at least 95 % of the runs inside three standard errors
        tally.check(double(outside) / runs, 0.05, std::move(inputs));
      } catch (const std::exception& e) {
        tally.error(e, std::move(inputs));
      }
    }
  }
  return tally.report;
}

// Prices a portfolio with each term's offsets scaled towards or away from
// the default choice, staying inside the feasible set.
PriceResult price_with_scaled_offsets(const LevyModel& model, const DigitalPortfolio& portfolio,
                                      double spot, double factor) {
  PriceResult total;
  total.value = portfolio.cash;
  for (const auto& term : portfolio.terms) {
    ContourOffsets base = default_offsets(model, term.payoff);
    ContourOffsets trial{base.omega * factor};
    // pull back towards the default until every leg is inside the strip
    for (double f = factor; !offsets_feasible(model, term.payoff, trial);) {
      f = 0.5 * (f + 1.0);
      trial.omega = base.omega * f;
    }
    PriceResult p = price_digital(model, term.schedule, term.payoff, spot, trial);
    total.value += term.coefficient * p.value;
    total.quadrature_error += std::abs(term.coefficient) * p.quadrature_error;
  }
  return total;
}

SuiteReport offsets_suite() {
  const double spot = 100.0, strike = 100.0, r = 0.05;
  std::vector<ContractSpec> contracts = {
      digital(1.0, strike, 1),
      AsianGeometric{even_schedule(0.0, 1.0, 4), strike, 1, {}},
      BarrierDownOutCall{even_schedule(0.0, 1.0, 2), 90.0, strike},
  };
  Tally tally;
  for (const ModelParams& params : {ModelParams{GaussianParams{0.2}}, kNig, kCgmyFast}) {
    LevyModel model = make_model(params, r);
    for (const auto& contract : contracts) {
      json inputs = {{"model", model_json(params, r)}, {"spot", spot}, {"contract", to_json(contract)}};
      try {
        DigitalPortfolio portfolio = to_portfolio(contract, model, spot);
        std::vector<PriceResult> prices;
        for (double factor : {1.0, 0.6, 1.4})
          prices.push_back(price_with_scaled_offsets(model, portfolio, spot, factor));
        // worst ratio of the price gap to ten times the summed error estimates
        double worst = 0.0;
        for (std::size_t i = 0; i < prices.size(); ++i) {
          for (std::size_t j = i + 1; j < prices.size(); ++j) {
            double gap = std::abs(prices[i].value - prices[j].value);
            double allowed = 10.0 * (prices[i].quadrature_error + prices[j].quadrature_error);
            worst = std::max(worst, allowed > 0 ? gap / allowed : (gap > 0 ? kInf : 0.0));
          }
        }
        inputs["prices"] = {prices[0].value, prices[1].value, prices[2].value};
        inputs["errors"] = {prices[0].quadrature_error, prices[1].quadrature_error,
                            prices[2].quadrature_error};
        tally.check(worst, 1.0, std::move(inputs));
      } catch (const std::exception& e) {
        tally.error(e, std::move(inputs));
      }
    }
  }
  return tally.report;
}

SuiteReport limits_suite() {
  const double spot = 100.0, strike = 100.0, r = 0.05, expiry = 1.0;
  PricingOptions one_d, multi_d;
  one_d.tol = 1e-12;
  multi_d.tol = 1e-9;
  Tally tally;
  for (const ModelParams& params : {ModelParams{GaussianParams{0.2}}, kNig, kCgmyFast}) {
    LevyModel model = make_model(params, r);
    json base = {{"model", model_json(params, r)}, {"spot", spot}};
    auto run = [&](const std::string& name, const std::function<void(json&)>& body) {
      json inputs = base;
      inputs["limit_case"] = name;
      try {
        body(inputs);
      } catch (const std::exception& e) {
        tally.error(e, std::move(inputs));
      }
    };
    double call = price_contract(vanilla(expiry, strike, 1), model, spot, one_d).value;
    double put = price_contract(vanilla(expiry, strike, -1), model, spot, one_d).value;
    run("barrier_to_zero", [&](json& in) {
      BarrierDownOutCall c{even_schedule(0.0, expiry, 2), 1e-6 * spot, strike};
      double v = price_contract(c, model, spot, multi_d).value;
      tally.check(rel_err(v, call), 1e-6, std::move(in));
    });
    run("lookback_one_date", [&](json& in) {
      LookbackFixed c{even_schedule(0.0, expiry, 1), strike, 1};
      tally.check(rel_err(price_contract(c, model, spot, one_d).value, call), 1e-6, std::move(in));
    });
    run("asian_one_date", [&](json& in) {
      AsianGeometric c{even_schedule(0.0, expiry, 1), strike, 1, {}};
      tally.check(rel_err(price_contract(c, model, spot, one_d).value, call), 1e-6, std::move(in));
    });
    run("chooser_at_expiry", [&](json& in) {
      Chooser c{0.0, expiry - 1e-4, expiry, strike};
      tally.check(rel_err(price_contract(c, model, spot).value, call + put), 1e-4, std::move(in));
    });
    run("digital_call_plus_put", [&](json& in) {
      double up = price_contract(digital(expiry, strike, 1), model, spot, one_d).value;
      double down = price_contract(digital(expiry, strike, -1), model, spot, one_d).value;
      tally.check(std::abs(up + down - std::exp(-r * expiry)), 1e-8, std::move(in));
    });
  }
  return tally.report;
}

SuiteReport asian_limit_suite() {
  const double spot = 100.0, strike = 100.0, r = 0.05, t_start = 0.25, expiry = 1.0;
  Tally tally;
  AsianContinuous cont{0.0, t_start, expiry, strike, 1};
  for (const ModelParams& params : {ModelParams{GaussianParams{0.2}}, kNig}) {
    LevyModel model = make_model(params, r);
    json base = {{"model", model_json(params, r)}, {"spot", spot}, {"contract", to_json(ContractSpec{cont})}};
    try {
      double limit = price_asian_continuous(cont, model, spot).value;
      PricingOptions options;
      options.tol = 1e-12;
      double previous = kInf;
      for (int m : {4, 8, 16, 32}) {
        // dates t_start + j h, j = 1..M, h = (T - t_start) / M
        AsianGeometric discrete{even_schedule(t_start, expiry, m), strike, 1, {}};
        discrete.schedule.t = 0.0;
        double gap = std::abs(price_contract(discrete, model, spot, options).value - limit);
        json inputs = base;
        inputs["m"] = m;
        inputs["gap"] = gap;
        inputs["previous_gap"] = previous;
        // strictly decreasing gap; measured as the ratio to the previous one
        if (m > 4) tally.add(gap < previous, gap / previous, std::move(inputs));
        previous = gap;
      }
      if (std::holds_alternative<GaussianParams>(params)) {
        double exact = closed_form_price(cont, std::get<GaussianParams>(params).sigma, r, spot);
        json inputs = base;
        inputs["fourier"] = limit;
        inputs["closed_form"] = exact;
        tally.check(rel_err(limit, exact), 1e-6, std::move(inputs));
      }
    } catch (const std::exception& e) {
      tally.error(e, base);
    }
  }
  return tally.report;
}

SuiteReport emm_suite() {
  Tally tally;
  std::vector<ModelParams> params = {GaussianParams{0.1}, GaussianParams{0.4}, kNig,
                                     NigParams{15.0, 3.0, 0.5}, kCgmySlow, kCgmyFast};
  for (const auto& p : params) {
    for (double r : {0.0, 0.05}) {
      json inputs = {{"model", model_json(p, r)}};
      try {
        LevyModel model = make_model(p, r);
        inputs["check"] = "mean_correction";
        tally.check(model.emm_residual(), 1e-12, inputs);
        inputs["check"] = "psi_at_zero";
        tally.check(std::abs(model.psi(0.0)), 1e-14, inputs);
        LevyModel q = esscher_calibrate(make_historic_model(p, 0.08, r), r).model;
        inputs["check"] = "esscher";
        tally.check(q.emm_residual(), 1e-12, inputs);
        if (const auto* g = std::get_if<GaussianParams>(&p)) {
          inputs["check"] = "esscher_gaussian_drift";
          tally.check(std::abs(q.mu() - (r - 0.5 * g->sigma * g->sigma)), 1e-12, inputs);
        }
      } catch (const std::exception& e) {
        tally.error(e, std::move(inputs));
      }
    }
  }
  return tally.report;
}

SuiteReport linearity_suite() {
  const double spot = 100.0, r = 0.05;
  Tally tally;
  for (const ModelParams& params : {ModelParams{GaussianParams{0.2}}, kNig, kCgmySlow}) {
    LevyModel model = make_model(params, r);
    for (int w : {1, -1}) {
      ForwardStart c{0.0, 0.5, 1.0, w};
      json base = {{"model", model_json(params, r)}, {"spot", spot}, {"contract", to_json(ContractSpec{c})}};
      try {
        double v = price_contract(c, model, spot).value;
        for (double lambda : {0.5, 2.0}) {
          json inputs = base;
          inputs["lambda"] = lambda;
          double scaled = price_contract(c, model, lambda * spot).value;
          tally.check(rel_err(scaled, lambda * v), 1e-10, std::move(inputs));
        }
      } catch (const std::exception& e) {
        tally.error(e, base);
      }
    }
  }
  return tally.report;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"lemma1", "gaussian",    "parity",
                                                 "mc",     "offsets",     "limits",
                                                 "asian-limit", "emm", "linearity"};
  return names;
}

SuiteReport run_suite(const std::string& name) {
  static const std::vector<std::pair<std::string, std::function<SuiteReport()>>> suites = {
      {"lemma1", lemma1_suite}, {"gaussian", gaussian_suite},       {"parity", parity_suite},
      {"mc", mc_suite},         {"offsets", offsets_suite},         {"limits", limits_suite},
      {"asian-limit", asian_limit_suite}, {"emm", emm_suite},       {"linearity", linearity_suite},
  };
  for (const auto& [key, fn] : suites) {
    if (key != name) continue;
    auto start = std::chrono::steady_clock::now();
    SuiteReport report = fn();
    report.suite = name;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace levyx
