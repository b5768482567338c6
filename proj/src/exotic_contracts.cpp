#include "levyx/exotic_contracts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levyx/contour_quadrature.hpp"
#include "levyx/errors.hpp"

namespace levyx {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidContract(msg);
}

void require_sign(int w, const char* what) {
  require(w == 1 || w == -1, std::string(what) + " must be +1 or -1");
}

PayoffParameterSet make_payoff(Eigen::MatrixXd a, Eigen::VectorXd k_log, Eigen::VectorXi w,
                               Eigen::VectorXd gamma) {
  PayoffParameterSet p;
  p.a = std::move(a);
  p.k_log = std::move(k_log);
  p.w = std::move(w);
  p.gamma = std::move(gamma);
  return p;
}

// w S_T 1(w (X_T - ln K) >= 0) - w K 1(same).
void add_vanilla(DigitalPortfolio& out, const MonitoringSchedule& sched, double strike, int w) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(1, 1);
  Eigen::VectorXd k = Eigen::VectorXd::Constant(1, std::log(strike));
  Eigen::VectorXi ws = Eigen::VectorXi::Constant(1, w);
  out.terms.push_back({double(w), sched, make_payoff(a, k, ws, Eigen::VectorXd::Ones(1))});
  out.terms.push_back({-w * strike, sched, make_payoff(a, k, ws, Eigen::VectorXd::Zero(1))});
}

int sign_product(const std::vector<CompoundLeg>& legs, std::size_t from, std::size_t to) {
  int s = 1;
  for (std::size_t k = from; k < to; ++k) s *= legs[k].w;
  return s;
}

std::vector<double> normalized_weights(const AsianGeometric& c) {
  std::vector<double> theta =
      c.weights.empty() ? std::vector<double>(c.schedule.size(), 1.0) : c.weights;
  double total = std::accumulate(theta.begin(), theta.end(), 0.0);
  for (double& x : theta) x /= total;
  return theta;
}

}  // namespace

const char* contract_type_name(const ContractSpec& c) {
  return std::visit(overloaded{[](const DigitalContract&) { return "digital"; },
                               [](const ForwardStart&) { return "forward_start"; },
                               [](const AsianGeometric&) { return "asian_geometric"; },
                               [](const AsianContinuous&) { return "asian_continuous"; },
                               [](const LookbackFixed&) { return "lookback_fixed"; },
                               [](const Chooser&) { return "chooser"; },
                               [](const Compound&) { return "compound"; },
                               [](const BarrierDownOutCall&) { return "barrier_down_out_call"; }},
                    c);
}

void validate_contract(const ContractSpec& contract) {
  std::visit(
      overloaded{
          [](const DigitalContract& c) {
            validate_schedule(c.schedule);
            validate_payoff(c.payoff, c.schedule.size());
          },
          [](const ForwardStart& c) {
            require(c.t < c.t1 && c.t1 < c.t2, "forward start needs t < t1 < t2");
            require_sign(c.w, "w");
          },
          [](const AsianGeometric& c) {
            validate_schedule(c.schedule);
            require(c.strike > 0.0, "strike must be positive");
            require_sign(c.w, "w");
            if (!c.weights.empty()) {
              require(static_cast<int>(c.weights.size()) == c.schedule.size(),
                      "one weight per monitoring date");
              double total = 0.0;
              for (double x : c.weights) {
                require(x >= 0.0 && std::isfinite(x), "weights must be nonnegative");
                total += x;
              }
              require(total > 0.0, "weights must not all vanish");
            }
          },
          [](const AsianContinuous& c) {
            require(c.t <= c.t_start && c.t_start < c.t_end,
                    "continuous Asian needs t <= t_start < t_end");
            require(c.strike > 0.0, "strike must be positive");
            require_sign(c.w, "w");
          },
          [](const LookbackFixed& c) {
            validate_schedule(c.schedule);
            if (c.schedule.size() > 3) {
              throw CapExceeded("lookback supports at most 3 monitoring dates");
            }
            require(c.strike > 0.0, "strike must be positive");
            require_sign(c.w, "w");
          },
          [](const Chooser& c) {
            require(c.t < c.t1 && c.t1 < c.t_expiry, "chooser needs t < t1 < t_expiry");
            require(c.strike > 0.0, "strike must be positive");
          },
          [](const Compound& c) {
            require(!c.legs.empty(), "compound needs at least one leg");
            if (c.legs.size() > 3) throw CapExceeded("compound depth is limited to 3");
            double prev = c.t;
            for (const auto& leg : c.legs) {
              require(leg.expiry > prev, "compound expiries must increase after t");
              require(leg.strike >= 0.0 && std::isfinite(leg.strike),
                      "compound strikes must be nonnegative");
              require_sign(leg.w, "leg w");
              prev = leg.expiry;
            }
            require(c.legs.back().strike > 0.0, "innermost strike must be positive");
          },
          [](const BarrierDownOutCall& c) {
            validate_schedule(c.schedule);
            require(c.barrier > 0.0, "barrier must be positive");
            require(c.strike > 0.0, "strike must be positive");
          },
      },
      contract);
}

DigitalPortfolio compound_portfolio(const Compound& c, const std::vector<double>& thresholds) {
  const std::size_t n = c.legs.size();
  if (thresholds.size() != n) throw UnsolvedThresholds("one threshold per leg is required");
  for (double s : thresholds) {
    if (!(s > 0.0) || !std::isfinite(s)) throw UnsolvedThresholds("thresholds must be positive");
  }
  DigitalPortfolio out;
  // exercise at T_j when W_j (X_j - ln S_j*) >= 0 with W_j = prod_{k >= j} w_k
  auto build = [&](std::size_t count, bool asset) {
    MonitoringSchedule sched{c.t, {}};
    Eigen::VectorXd k(count);
    Eigen::VectorXi w(count);
    for (std::size_t j = 0; j < count; ++j) {
      sched.dates.push_back(c.legs[j].expiry);
      k[j] = std::log(thresholds[j]);
      w[j] = sign_product(c.legs, j, n);
    }
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(count);
    if (asset) gamma[count - 1] = 1.0;
    return std::make_pair(sched, make_payoff(Eigen::MatrixXd::Identity(count, count), k, w, gamma));
  };
  auto [sched, payoff] = build(n, true);
  out.terms.push_back({double(sign_product(c.legs, 0, n)), sched, payoff});
  for (std::size_t j = 1; j <= n; ++j) {
    if (c.legs[j - 1].strike == 0.0) continue;
    auto [s, p] = build(j, false);
    out.terms.push_back({-c.legs[j - 1].strike * sign_product(c.legs, 0, j), s, p});
  }
  return out;
}

std::vector<double> solve_compound_thresholds(const Compound& c, const LevyModel& model,
                                              const PricingOptions& options) {
  validate_contract(c);
  const auto& legs = c.legs;
  const std::size_t n = legs.size();
  std::vector<double> s(n, 0.0);
  s[n - 1] = legs[n - 1].strike;
  for (std::size_t j = n - 1; j-- > 0;) {
    // the inner option seen from T_j
    Compound inner{legs[j].expiry, std::vector<CompoundLeg>(legs.begin() + j + 1, legs.end())};
    std::vector<double> inner_s(s.begin() + j + 1, s.end());
    bool increasing = sign_product(legs, j + 1, n) > 0;
    if (legs[j].strike == 0.0) {
      s[j] = s[j + 1] * std::ldexp(1.0, increasing ? -60 : 60);
      continue;
    }
    DigitalPortfolio portfolio = compound_portfolio(inner, inner_s);
    auto f = [&](double spot) {
      return price_portfolio(model, portfolio, spot, options).value - legs[j].strike;
    };
    s[j] = find_root_geometric(f, legs[j].strike, 1e-10);
  }
  return s;
}

DigitalPortfolio to_portfolio(const ContractSpec& contract, const LevyModel& model, double spot) {
  validate_contract(contract);
  (void)spot;
  return std::visit(
      overloaded{
          [](const DigitalContract& c) {
            DigitalPortfolio out;
            out.terms.push_back({1.0, c.schedule, c.payoff});
            return out;
          },
          [](const ForwardStart& c) {
            DigitalPortfolio out;
            MonitoringSchedule sched{c.t, {c.t1, c.t2}};
            Eigen::MatrixXd a(1, 2);
            a << -1.0, 1.0;
            Eigen::VectorXd k = Eigen::VectorXd::Zero(1);
            Eigen::VectorXi w = Eigen::VectorXi::Constant(1, c.w);
            out.terms.push_back({double(c.w), sched, make_payoff(a, k, w, Eigen::Vector2d(0, 1))});
            out.terms.push_back({-double(c.w), sched, make_payoff(a, k, w, Eigen::Vector2d(1, 0))});
            return out;
          },
          [](const AsianGeometric& c) {
            DigitalPortfolio out;
            std::vector<double> theta = normalized_weights(c);
            const int m = c.schedule.size();
            Eigen::VectorXd gamma = Eigen::Map<const Eigen::VectorXd>(theta.data(), m);
            Eigen::MatrixXd a = gamma.transpose();
            Eigen::VectorXd k = Eigen::VectorXd::Constant(1, std::log(c.strike));
            Eigen::VectorXi w = Eigen::VectorXi::Constant(1, c.w);
            out.terms.push_back({double(c.w), c.schedule, make_payoff(a, k, w, gamma)});
            out.terms.push_back(
                {-c.w * c.strike, c.schedule, make_payoff(a, k, w, Eigen::VectorXd::Zero(m))});
            return out;
          },
          [](const AsianContinuous&) -> DigitalPortfolio {
            throw UnsupportedContract(
                "the continuous Asian has no finite digital decomposition; use its 1-D integral");
          },
          [&](const LookbackFixed& c) {
            DigitalPortfolio out;
            const int m = c.schedule.size();
            if (m == 1) {
              add_vanilla(out, c.schedule, c.strike, c.w);
              return out;
            }
            const double ln_k = std::log(c.strike);
            for (int p = 0; p < m; ++p) {
              // rows e_p - e_j: date p is the extreme one
              Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m - 1, m);
              int row = 0;
              for (int j = 0; j < m; ++j) {
                if (j == p) continue;
                a(row, p) = 1.0;
                a(row, j) = -1.0;
                ++row;
              }
              Eigen::VectorXd gamma = Eigen::VectorXd::Unit(m, p);
              Eigen::VectorXi w = Eigen::VectorXi::Constant(m - 1, c.w);
              out.terms.push_back(
                  {double(c.w), c.schedule, make_payoff(a, Eigen::VectorXd::Zero(m - 1), w, gamma)});
              // ... and additionally w (ln K - X_p) > 0
              Eigen::MatrixXd b(m, m);
              b << a, -Eigen::RowVectorXd::Unit(m, p);
              Eigen::VectorXd kb = Eigen::VectorXd::Zero(m);
              kb[m - 1] = -ln_k;
              out.terms.push_back({-double(c.w), c.schedule,
                                   make_payoff(b, kb, Eigen::VectorXi::Constant(m, c.w), gamma)});
            }
            // w K 1(w (X_j - ln K) < 0 for all j)
            out.terms.push_back({c.w * c.strike, c.schedule,
                                 make_payoff(Eigen::MatrixXd::Identity(m, m),
                                             Eigen::VectorXd::Constant(m, ln_k),
                                             Eigen::VectorXi::Constant(m, -c.w),
                                             Eigen::VectorXd::Zero(m))});
            out.cash = -c.w * c.strike *
                       std::exp(-model.rate() * (c.schedule.expiry() - c.schedule.t));
            return out;
          },
          [&](const Chooser& c) {
            DigitalPortfolio out;
            MonitoringSchedule sched{c.t, {c.t1, c.t_expiry}};
            Eigen::Vector2d k(std::log(c.strike) - model.rate() * (c.t_expiry - c.t1),
                              std::log(c.strike));
            Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
            Eigen::VectorXi up = Eigen::VectorXi::Ones(2), down = -up;
            Eigen::Vector2d asset(0, 1), cash(0, 0);
            out.terms.push_back({1.0, sched, make_payoff(a, k, up, asset)});
            out.terms.push_back({-c.strike, sched, make_payoff(a, k, up, cash)});
            out.terms.push_back({c.strike, sched, make_payoff(a, k, down, cash)});
            out.terms.push_back({-1.0, sched, make_payoff(a, k, down, asset)});
            return out;
          },
          [&](const Compound& c) {
            return compound_portfolio(c, solve_compound_thresholds(c, model));
          },
          [](const BarrierDownOutCall& c) {
            DigitalPortfolio out;
            const int m = c.schedule.size();
            Eigen::VectorXd k = Eigen::VectorXd::Constant(m, std::log(c.barrier));
            k[m - 1] = std::log(c.strike);
            Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
            Eigen::VectorXi w = Eigen::VectorXi::Ones(m);
            out.terms.push_back({1.0, c.schedule, make_payoff(a, k, w, Eigen::VectorXd::Unit(m, m - 1))});
            out.terms.push_back({-c.strike, c.schedule, make_payoff(a, k, w, Eigen::VectorXd::Zero(m))});
            return out;
          },
      },
      contract);
}

PriceResult price_portfolio(const LevyModel& model, const DigitalPortfolio& portfolio, double spot,
                            const PricingOptions& options) {
  PriceResult out;
  CompensatedSum<double> value;
  value.add(portfolio.cash);
  for (const auto& term : portfolio.terms) {
    PriceResult r = price_digital(model, term.schedule, term.payoff, spot, std::nullopt, options);
    value.add(term.coefficient * r.value);
    out.quadrature_error += std::abs(term.coefficient) * r.quadrature_error;
    out.evaluations += r.evaluations;
    if (r.n > out.n) out.offsets_used = r.offsets_used;
    out.n = std::max(out.n, r.n);
    out.m = std::max(out.m, r.m);
  }
  out.value = value.value();
  return out;
}

PriceResult price_contract(const ContractSpec& c, const LevyModel& model, double spot,
                           const PricingOptions& options) {
  if (!(spot > 0.0)) throw InvalidPayoff("spot must be positive");
  if (const auto* asian = std::get_if<AsianContinuous>(&c)) {
    validate_contract(c);
    return price_asian_continuous(*asian, model, spot, options.tol > 0.0 ? options.tol : 1e-10);
  }
  if (const auto* compound = std::get_if<Compound>(&c)) {
    validate_contract(c);
    return price_portfolio(model,
                           compound_portfolio(*compound, solve_compound_thresholds(*compound, model, options)),
                           spot, options);
  }
  return price_portfolio(model, to_portfolio(c, model, spot), spot, options);
}

cplx continuous_asian_psi(const LevyModel& model, cplx xi) {
  // the segment xi (1 - y) runs from xi to 0, so checking xi is enough
  model.psi(xi);
  const auto& rule = gauss_legendre(64);
  CompensatedSum<cplx> sum;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    double y = 0.5 * (rule.nodes[q] + 1.0);
    sum.add(0.5 * rule.weights[q] * model.psi_unchecked(xi * (1.0 - y)));
  }
  return sum.value();
}

PriceResult price_asian_continuous(const AsianContinuous& c, const LevyModel& model, double spot,
                                   double tol) {
  validate_contract(c);
  const Strip& strip = model.strip();
  const double lead = c.t_start - c.t, span = c.t_end - c.t_start;
  const double d = std::log(spot / c.strike);
  auto big_psi = [&](cplx xi) {
    return lead * model.psi_unchecked(xi) + span * continuous_asian_psi(model, xi);
  };
  // line Im xi = -w omega below (w = 1) or above (w = -1) both poles 0 and -i
  double lo = c.w == 1 ? 1.0 : 0.0;
  double hi = c.w == 1 ? -strip.lambda_minus : strip.lambda_plus;
  if (!(lo < hi)) throw NoFeasibleOffsets("strip leaves no line for the continuous Asian");
  auto log_bound = [&](double omega) {
    double b = -c.w * omega;
    return -b * d - big_psi(cplx{0.0, b}).real() - std::log(omega) - std::log(std::abs(b + 1.0)) -
           std::log(omega - lo) - std::log(hi - omega);
  };
  double pad = 1e-9 * (hi - lo);
  double omega = minimize_unimodal(log_bound, lo + pad, hi - pad, 1e-8 * (1.0 + hi));
  double b = -c.w * omega;
  double scale_log = log_bound(omega) + std::log(omega - lo) + std::log(hi - omega);
  double tau_eff = lead + span / (model.order() + 1.0);
  double trunc = truncation_radius(model.decay_constant(), model.order(), tau_eff, 1e-3 * tol);
  auto f = [&](cplx xi) {
    return std::exp(kI * xi * d - big_psi(xi) - scale_log) / (xi * (xi + kI));
  };
  const double discount = std::exp(-model.rate() * (c.t_end - c.t));
  const double prefactor = c.strike * discount * std::exp(scale_log) / kTwoPi;
  QuadratureResult q = integrate_line(f, b, trunc, tol / prefactor, 1 << 20);
  if (!q.converged) throw NoConvergence("continuous Asian quadrature did not converge");
  cplx v = -prefactor * q.value;
  if (std::abs(v.imag()) > 1e-8 * (1.0 + std::abs(v.real()))) {
    throw ImaginaryResidue("continuous Asian imaginary residue " + std::to_string(v.imag()));
  }
  PriceResult out;
  out.value = v.real();
  out.quadrature_error = prefactor * q.error_estimate;
  out.offsets_used.omega = Eigen::VectorXd::Constant(1, omega);
  out.n = out.m = 1;
  out.evaluations = q.evaluations;
  return out;
}

PriceResult price_chooser_simplified(const Chooser& c, const LevyModel& model, double spot,
                                     const PricingOptions& options) {
  validate_contract(c);
  DigitalPortfolio portfolio;
  add_vanilla(portfolio, MonitoringSchedule{c.t, {c.t_expiry}}, c.strike, 1);
  add_vanilla(portfolio, MonitoringSchedule{c.t, {c.t1}},
              c.strike * std::exp(-model.rate() * (c.t_expiry - c.t1)), -1);
  return price_portfolio(model, portfolio, spot, options);
}

double compound_parity_check(const LevyModel& model, double t, double k1, double t1, double k2,
                             double t2, int w2, double spot, const PricingOptions& options) {
  Compound call{t, {{t1, k1, 1}, {t2, k2, w2}}};
  Compound put{t, {{t1, k1, -1}, {t2, k2, w2}}};
  Compound inner{t, {{t2, k2, w2}}};
  double f_call = price_contract(call, model, spot, options).value;
  double f_put = price_contract(put, model, spot, options).value;
  double f_inner = price_contract(inner, model, spot, options).value;
  return f_call - f_put - f_inner + k1 * std::exp(-model.rate() * (t1 - t));
}

}  // namespace levyx
