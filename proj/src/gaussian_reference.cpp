#include "levyx/gaussian_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "levyx/contour_quadrature.hpp"
#include "levyx/errors.hpp"

namespace levyx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this conditional standard deviation a variable is treated as a
// deterministic function of the conditioning one.
constexpr double kSingular = 1e-7;
// Standard normal mass below -kZTail is about 1e-19.
constexpr double kZTail = 9.0;

double mvn_recursive(std::vector<double> d, Eigen::MatrixXd c);

double mvn_conditioned(const std::vector<double>& d, const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(d.size());
  // condition on the most restrictive variable
  int first = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
  std::vector<int> rest;
  for (int k = 0; k < n; ++k) {
    if (k != first) rest.push_back(k);
  }
  double z_lo = -kZTail, z_hi = d[first];
  std::vector<int> kept;
  std::vector<double> rho, s;
  for (int k : rest) {
    double r = std::clamp(c(k, first), -1.0, 1.0);
    double sd = std::sqrt(std::max(0.0, 1.0 - r * r));
    if (sd < kSingular) {
      // Z_k = +-z exactly: the condition bounds z
      if (r > 0.0) {
        z_hi = std::min(z_hi, d[k]);
      } else {
        z_lo = std::max(z_lo, -d[k]);
      }
      continue;
    }
    kept.push_back(k);
    rho.push_back(r);
    s.push_back(sd);
  }
  if (!(z_lo < z_hi)) return 0.0;
  const int m = static_cast<int>(kept.size());
  if (m == 0) return norm_cdf(z_hi) - norm_cdf(z_lo);
  Eigen::MatrixXd partial(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      partial(i, j) = i == j ? 1.0
                             : std::clamp((c(kept[i], kept[j]) - rho[i] * rho[j]) / (s[i] * s[j]),
                                          -1.0, 1.0);
    }
  }
  auto g = [&](double z) {
    std::vector<double> dz(m);
    for (int i = 0; i < m; ++i) dz[i] = (d[kept[i]] - rho[i] * z) / s[i];
    return norm_pdf(z) * mvn_recursive(dz, partial);
  };
  if (n <= 3) {
    return integrate_adaptive(g, z_lo, z_hi, 1e-12, 0.0, 400).value;
  }
  // fixed composite Gauss-Legendre keeps the deeper recursions affordable
  const auto& rule = gauss_legendre(n == 4 ? 48 : 24);
  const int panels = 2;
  double width = (z_hi - z_lo) / panels, total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = z_lo + p * width;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      total += 0.5 * width * rule.weights[q] * g(a + 0.5 * width * (rule.nodes[q] + 1.0));
    }
  }
  return total;
}

double mvn_recursive(std::vector<double> d, Eigen::MatrixXd c) {
  // drop unconstrained coordinates, short-circuit impossible ones
  std::vector<int> keep;
  for (int k = 0; k < static_cast<int>(d.size()); ++k) {
    if (d[k] == -kInf) return 0.0;
    if (d[k] != kInf) keep.push_back(k);
  }
  const int n = static_cast<int>(keep.size());
  if (n == 0) return 1.0;
  if (n != static_cast<int>(d.size())) {
    std::vector<double> dk(n);
    Eigen::MatrixXd ck(n, n);
    for (int i = 0; i < n; ++i) {
      dk[i] = d[keep[i]];
      for (int j = 0; j < n; ++j) ck(i, j) = c(keep[i], keep[j]);
    }
    d = std::move(dk);
    c = std::move(ck);
  }
  if (n == 1) return norm_cdf(d[0]);
  if (n == 2) return bvn_cdf(d[0], d[1], c(0, 1));
  return std::clamp(mvn_conditioned(d, c), 0.0, 1.0);
}

// exp(i xi.d - xi'C xi / 2) / prod xi on a tensor of horizontal lines.
class QuadraticIntegrand final : public LineIntegrand {
 public:
  QuadraticIntegrand(const Eigen::VectorXd& d, const Eigen::MatrixXd& c) : d_(d), c_(c) {}

  void set_grid(const std::vector<std::vector<cplx>>& nodes) override { nodes_ = &nodes; }

  void eval_line(std::span<const int> outer, std::span<cplx> out) const override {
    const auto& nodes = *nodes_;
    const int n = static_cast<int>(nodes.size());
    cplx xi[3];
    for (int a = 1; a < n; ++a) xi[a] = nodes[a][outer[a - 1]];
    cplx rest_exp = 0.0, lin = 0.0, rest_prod = 1.0;
    for (int a = 1; a < n; ++a) {
      rest_exp += kI * xi[a] * d_[a];
      rest_prod *= xi[a];
      lin += c_(0, a) * xi[a];
      for (int b = 1; b < n; ++b) rest_exp -= 0.5 * c_(a, b) * xi[a] * xi[b];
    }
    cplx pre = std::exp(rest_exp) / rest_prod;
    for (std::size_t k = 0; k < out.size(); ++k) {
      cplx x = nodes[0][k];
      out[k] = pre * std::exp(x * (kI * d_[0] - 0.5 * c_(0, 0) * x - lin)) / x;
    }
  }

 private:
  Eigen::VectorXd d_;
  Eigen::MatrixXd c_;
  const std::vector<std::vector<cplx>>* nodes_ = nullptr;
};

double normal_call(double forward, double strike, double var, double discount, int w) {
  double sd = std::sqrt(var);
  double d1 = (std::log(forward / strike) + 0.5 * var) / sd, d2 = d1 - sd;
  return discount * w * (forward * norm_cdf(w * d1) - strike * norm_cdf(w * d2));
}

int sign_product(const std::vector<CompoundLeg>& legs, std::size_t from, std::size_t to) {
  int s = 1;
  for (std::size_t k = from; k < to; ++k) s *= legs[k].w;
  return s;
}

// Value at time t of the compound formed by legs[from..], given its thresholds.
double geske_value(const std::vector<CompoundLeg>& legs, std::size_t from,
                   const std::vector<double>& thresholds, double t, double sigma, double r,
                   double spot) {
  const std::size_t n = legs.size() - from;
  auto tau = [&](std::size_t j) { return legs[from + j].expiry - t; };
  auto big_w = [&](std::size_t j) { return sign_product(legs, from + j, legs.size()); };
  auto probability = [&](std::size_t count, double shift) {
    Eigen::VectorXd d(count);
    Eigen::MatrixXd c(count, count);
    for (std::size_t i = 0; i < count; ++i) {
      double sd = sigma * std::sqrt(tau(i));
      d[i] = big_w(i) * (std::log(spot / thresholds[from + i]) + (r + shift) * tau(i)) / sd;
      for (std::size_t k = 0; k < count; ++k) {
        double rho = std::sqrt(std::min(tau(i), tau(k)) / std::max(tau(i), tau(k)));
        c(i, k) = big_w(i) * big_w(k) * rho;
      }
    }
    return mvn_cdf(d, c);
  };
  double half_var = 0.5 * sigma * sigma;
  double value = sign_product(legs, from, legs.size()) * spot * probability(n, half_var);
  for (std::size_t j = 0; j < n; ++j) {
    value -= sign_product(legs, from, from + j + 1) * legs[from + j].strike *
             std::exp(-r * tau(j)) * probability(j + 1, -half_var);
  }
  return value;
}

PayoffParameterSet conditions(const Eigen::MatrixXd& a, const Eigen::VectorXd& k_log,
                              const Eigen::VectorXi& w, const Eigen::VectorXd& gamma) {
  PayoffParameterSet p;
  p.a = a;
  p.k_log = k_log;
  p.w = w;
  p.gamma = gamma;
  return p;
}

}  // namespace

void validate_correlation(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols()) throw NotPSD("correlation matrix must be square");
  if (c.rows() > 6) {
    throw DimensionTooLarge("multivariate normal CDF supports at most 6 dimensions, got " +
                            std::to_string(c.rows()));
  }
  for (int i = 0; i < c.rows(); ++i) {
    if (std::abs(c(i, i) - 1.0) > 1e-12) throw NotPSD("correlation diagonal must be 1");
    for (int j = 0; j < i; ++j) {
      if (!(std::abs(c(i, j) - c(j, i)) <= 1e-12) || std::abs(c(i, j)) > 1.0 + 1e-12) {
        throw NotPSD("correlation matrix must be symmetric with entries in [-1, 1]");
      }
    }
  }
  if (c.rows() > 0) {
    double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff();
    if (min_eig < -1e-10) {
      throw NotPSD("smallest eigenvalue " + std::to_string(min_eig) + " below -1e-10");
    }
  }
}

double bvn_cdf(double h, double k, double rho) {
  if (h == -kInf || k == -kInf) return 0.0;
  if (h == kInf) return norm_cdf(k);
  if (k == kInf) return norm_cdf(h);
  if (rho >= 1.0 - 1e-15) return norm_cdf(std::min(h, k));
  if (rho <= -1.0 + 1e-15) return std::max(0.0, norm_cdf(h) - norm_cdf(-k));
  // Plackett: dPhi2/drho is the bivariate density; integrate over rho = sin(theta)
  auto f = [&](double theta) {
    double s = std::sin(theta), c2 = std::cos(theta) * std::cos(theta);
    return std::exp(-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2));
  };
  double integral = integrate_adaptive(f, 0.0, std::asin(rho), 1e-16, 1e-14, 400).value;
  return std::clamp(norm_cdf(h) * norm_cdf(k) + integral / kTwoPi, 0.0, 1.0);
}

double mvn_cdf(const Eigen::VectorXd& d, const Eigen::MatrixXd& c) {
  if (c.rows() != d.size()) throw NotPSD("threshold and correlation dimensions differ");
  validate_correlation(c);
  for (double x : d) {
    if (std::isnan(x)) throw NaNEncountered("threshold is NaN");
  }
  return mvn_recursive(std::vector<double>(d.begin(), d.end()), c);
}

double lemma1_contour_side(const Eigen::VectorXd& d, const Eigen::MatrixXd& c,
                           const Eigen::VectorXi& w, const Eigen::VectorXd& omega, double tol) {
  const int n = static_cast<int>(d.size());
  if (n < 1 || n > 3) throw DimensionTooLarge("contour side supports 1 to 3 dimensions");
  if (w.size() != n || omega.size() != n || c.rows() != n) {
    throw InvalidContour("inconsistent dimensions");
  }
  validate_correlation(c);
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) {
    if (!(omega[k] > 0.0)) throw InvalidContour("offsets must be positive");
    if (w[k] != 1 && w[k] != -1) throw InvalidContour("signs must be +-1");
    b[k] = -w[k] * omega[k];
  }
  // max over Re(xi) of the log-modulus on the lines Im(xi) = y
  auto log_peak = [&](const Eigen::VectorXd& y) { return -y.dot(d) + 0.5 * y.dot(c * y); };
  const double base = log_peak(b);
  Eigen::MatrixXd c_inv = c.completeOrthogonalDecomposition().pseudoInverse();
  ContourSpec spec;
  for (int k = 0; k < n; ++k) {
    double delta = 0.9 * omega[k];
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k) * delta;
    double growth = std::max(log_peak(b + e), log_peak(b - e)) - base;
    double h = kTwoPi * delta / (std::log(1.0 / tol) + std::max(0.0, growth) + std::log(10.0) + 2.0);
    double marginal = std::max(c_inv(k, k), 1.0);
    double trunc = std::sqrt(2.0 * marginal * (std::log(1.0 / tol) + std::max(0.0, base) + 4.0));
    spec.offsets.push_back(b[k]);
    spec.truncation.push_back(trunc);
    spec.nodes.push_back(2 * static_cast<int>(std::ceil(trunc / (0.5 * h))));
  }
  QuadraticIntegrand integrand(d, c);
  QuadratureOptions options;
  options.tol = tol * std::pow(kTwoPi, n);
  options.max_nodes_per_axis = 1 << 20;
  options.hermitian = n >= 2;
  QuadratureResult q = integrate_lines(integrand, spec, options);
  if (!q.converged) throw NoConvergence("contour side did not converge");
  cplx scale = std::pow(cplx{0.0, -1.0}, n) / std::pow(kTwoPi, n);
  return (scale * q.value).real();
}

double black_scholes(double spot, double strike, double tau, double sigma, double r, int w) {
  if (!(spot > 0.0) || !(strike > 0.0) || !(tau > 0.0) || !(sigma > 0.0)) {
    throw NonPositiveInput("black_scholes needs positive spot, strike, tau and sigma");
  }
  return normal_call(spot * std::exp(r * tau), strike, sigma * sigma * tau, std::exp(-r * tau), w);
}

double gaussian_power_digital(double sigma, double r, const MonitoringSchedule& sched,
                              const PayoffParameterSet& p, double spot) {
  validate_schedule(sched);
  validate_payoff(p, sched.size());
  const int m = sched.size(), n = p.n();
  const double mu = r - 0.5 * sigma * sigma;
  // Y_k = X_{T_k} - ln S_t
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov(m, m);
  for (int j = 0; j < m; ++j) {
    mean[j] = mu * (sched.dates[j] - sched.t);
    for (int k = 0; k < m; ++k) {
      cov(j, k) = sigma * sigma * (std::min(sched.dates[j], sched.dates[k]) - sched.t);
    }
  }
  // E[e^{gamma.Y} 1(...)] = E[e^{gamma.Y}] P~(...), Y ~ N(mean + cov gamma, cov) under P~
  double log_mgf = p.gamma.dot(mean) + 0.5 * p.gamma.dot(cov * p.gamma);
  Eigen::VectorXd tilted = mean + cov * p.gamma;
  Eigen::MatrixXd rows(n, m);
  Eigen::VectorXd lower(n);
  const double ln_s = std::log(spot);
  for (int i = 0; i < n; ++i) {
    rows.row(i) = p.w[i] * p.a.row(i);
    lower[i] = p.w[i] * (p.k_log[i] - p.a.row(i).sum() * ln_s);
  }
  Eigen::MatrixXd cov_rows = rows * cov * rows.transpose();
  Eigen::VectorXd sd = cov_rows.diagonal().cwiseSqrt();
  Eigen::VectorXd thresholds = (rows * tilted - lower).cwiseQuotient(sd);
  Eigen::MatrixXd corr = cov_rows.cwiseQuotient(sd * sd.transpose());
  corr.diagonal().setOnes();
  double discount = std::exp(-r * (sched.expiry() - sched.t));
  return discount * std::pow(spot, p.gamma.sum()) * std::exp(log_mgf) * mvn_cdf(thresholds, corr);
}

std::vector<double> gaussian_compound_thresholds(const Compound& c, double sigma, double r) {
  const auto& legs = c.legs;
  const std::size_t n = legs.size();
  std::vector<double> s(n, 0.0);
  s[n - 1] = legs[n - 1].strike;
  for (std::size_t j = n - 1; j-- > 0;) {
    double t_j = legs[j].expiry;
    bool increasing = sign_product(legs, j + 1, n) > 0;
    if (legs[j].strike == 0.0) {
      // always exercised: the threshold sits at the end of the bracket
      s[j] = s[j + 1] * std::ldexp(1.0, increasing ? -60 : 60);
      continue;
    }
    auto f = [&](double spot) {
      return geske_value(legs, j + 1, s, t_j, sigma, r, spot) - legs[j].strike;
    };
    s[j] = find_root_geometric(f, legs[j].strike, 1e-12);
  }
  return s;
}

double closed_form_price(const ContractSpec& contract, double sigma, double r, double spot) {
  validate_contract(contract);
  if (!(sigma > 0.0) || !(spot > 0.0)) {
    throw NonPositiveInput("closed form needs positive sigma and spot");
  }
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, DigitalContract>) {
          return gaussian_power_digital(sigma, r, c.schedule, c.payoff, spot);
        } else if constexpr (std::is_same_v<T, ForwardStart>) {
          // the strike is fixed at T1, so the value is S_t times a unit-moneyness option
          return spot * black_scholes(1.0, 1.0, c.t2 - c.t1, sigma, r, c.w);
        } else if constexpr (std::is_same_v<T, AsianGeometric>) {
          const int m = c.schedule.size();
          std::vector<double> theta = c.weights.empty() ? std::vector<double>(m, 1.0) : c.weights;
          double total = std::accumulate(theta.begin(), theta.end(), 0.0);
          double mean = 0.0, var = 0.0, lambda = 1.0, prev = c.schedule.t;
          for (int j = 0; j < m; ++j) {
            double tau = c.schedule.dates[j] - prev;
            mean += (r - 0.5 * sigma * sigma) * tau * lambda;
            var += sigma * sigma * tau * lambda * lambda;
            lambda -= theta[j] / total;
            prev = c.schedule.dates[j];
          }
          return normal_call(spot * std::exp(mean + 0.5 * var), c.strike, var,
                             std::exp(-r * (c.schedule.expiry() - c.schedule.t)), c.w);
        } else if constexpr (std::is_same_v<T, AsianContinuous>) {
          double lead = c.t_start - c.t, span = c.t_end - c.t_start;
          double mean = (r - 0.5 * sigma * sigma) * (lead + 0.5 * span);
          double var = sigma * sigma * (lead + span / 3.0);
          return normal_call(spot * std::exp(mean + 0.5 * var), c.strike, var,
                             std::exp(-r * (c.t_end - c.t)), c.w);
        } else if constexpr (std::is_same_v<T, LookbackFixed>) {
          const int m = c.schedule.size();
          if (m > 3) throw UnsupportedContract("lookback closed form supports at most 3 dates");
          // sum over p of w (S_p - K) on {p is the extreme date and w (X_p - ln K) >= 0}
          double total = 0.0;
          for (int p = 0; p < m; ++p) {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
            Eigen::VectorXd k_log = Eigen::VectorXd::Zero(m);
            int row = 0;
            for (int j = 0; j < m; ++j) {
              if (j == p) continue;
              a(row, p) = 1.0;
              a(row, j) = -1.0;
              ++row;
            }
            a(row, p) = 1.0;
            k_log[row] = std::log(c.strike);
            Eigen::VectorXi w = Eigen::VectorXi::Constant(m, c.w);
            total += gaussian_power_digital(
                sigma, r, c.schedule, conditions(a, k_log, w, Eigen::VectorXd::Unit(m, p)), spot);
            total -= c.strike * gaussian_power_digital(
                                    sigma, r, c.schedule,
                                    conditions(a, k_log, w, Eigen::VectorXd::Zero(m)), spot);
          }
          return c.w * total;
        } else if constexpr (std::is_same_v<T, Chooser>) {
          return black_scholes(spot, c.strike, c.t_expiry - c.t, sigma, r, 1) +
                 black_scholes(spot, c.strike * std::exp(-r * (c.t_expiry - c.t1)), c.t1 - c.t,
                               sigma, r, -1);
        } else if constexpr (std::is_same_v<T, Compound>) {
          std::vector<double> s = gaussian_compound_thresholds(c, sigma, r);
          return geske_value(c.legs, 0, s, c.t, sigma, r, spot);
        } else {
          static_assert(std::is_same_v<T, BarrierDownOutCall>);
          const int m = c.schedule.size();
          if (m > 3) throw UnsupportedContract("barrier closed form supports at most 3 dates");
          Eigen::VectorXd k_log = Eigen::VectorXd::Constant(m, std::log(c.barrier));
          k_log[m - 1] = std::log(c.strike);
          Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
          Eigen::VectorXi w = Eigen::VectorXi::Ones(m);
          return gaussian_power_digital(sigma, r, c.schedule,
                                        conditions(a, k_log, w, Eigen::VectorXd::Unit(m, m - 1)),
                                        spot) -
                 c.strike * gaussian_power_digital(
                                sigma, r, c.schedule,
                                conditions(a, k_log, w, Eigen::VectorXd::Zero(m)), spot);
        }
      },
      contract);
}

}  // namespace levyx
