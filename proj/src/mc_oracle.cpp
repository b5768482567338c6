#include "levyx/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>

#include "levyx/errors.hpp"

namespace levyx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draws increments of X over a step of length dt.
class IncrementSampler {
 public:
  explicit IncrementSampler(const LevyModel& model) : mu_(model.mu()) {
    if (const auto* g = std::get_if<GaussianParams>(&model.params())) {
      sigma_ = g->sigma;
    } else if (const auto* n = std::get_if<NigParams>(&model.params())) {
      nig_ = true;
      beta_ = n->beta;
      delta_ = n->delta;
      gamma_ = std::sqrt(n->alpha * n->alpha - n->beta * n->beta);
    } else {
      throw UnsupportedModel("Monte Carlo supports gaussian and nig models, not " + model.kind());
    }
  }

  template <class Rng>
  double operator()(double dt, Rng& rng) {
    double z = normal_(rng);
    if (!nig_) return mu_ * dt + sigma_ * std::sqrt(dt) * z;
    // normal variance-mean mixture with an inverse Gaussian clock
    double v = inverse_gaussian(delta_ * dt / gamma_, delta_ * delta_ * dt * dt, rng);
    return mu_ * dt + beta_ * v + std::sqrt(v) * z;
  }

 private:
  // Michael, Schucany and Haas transformation with one rejection step.
  template <class Rng>
  double inverse_gaussian(double mean, double shape, Rng& rng) {
    double n = normal_(rng);
    double y = n * n;
    double x = mean + mean * mean * y / (2.0 * shape) -
               mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
    return uniform_(rng) <= mean / (mean + x) ? x : mean * mean / x;
  }

  double mu_;
  double sigma_ = 0.0, beta_ = 0.0, delta_ = 0.0, gamma_ = 0.0;
  bool nig_ = false;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Runs fn(path_index, log_returns) for every path, block by block.
template <class Fn>
void for_each_path(const LevyModel& model, const std::vector<double>& times, double t0,
                   std::int64_t n_paths, std::uint64_t seed, std::int64_t block, Fn&& fn) {
  const std::int64_t first = block * kPathsPerBlock;
  const std::int64_t last = std::min(n_paths, first + kPathsPerBlock);
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(block))));
  IncrementSampler sampler(model);
  std::vector<double> x(times.size());
  for (std::int64_t i = first; i < last; ++i) {
    double level = 0.0, prev = t0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      level += sampler(times[k] - prev, rng);
      prev = times[k];
      x[k] = level;
    }
    fn(i, std::span<const double>(x));
  }
}

struct Moments {
  std::int64_t n = 0;
  double mean = 0.0, m2 = 0.0;

  void add(double v) {
    ++n;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  // Chan et al. pairwise combination
  void merge(const Moments& o) {
    if (o.n == 0) return;
    std::int64_t total = n + o.n;
    double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * double(n) * double(o.n) / total;
    n = total;
  }
};

// Inner option value on a log-spaced grid of spots at T_1, linearly
// interpolated in log-spot.
class ValueTable {
 public:
  ValueTable(const Compound& inner, const LevyModel& model, double lo, double hi) {
    const int n = 2048;
    lo_ = lo;
    step_ = (hi - lo) / (n - 1);
    std::vector<double> thresholds = solve_compound_thresholds(inner, model);
    DigitalPortfolio portfolio = compound_portfolio(inner, thresholds);
    values_.resize(n);
    parallel_for(n, [&](std::size_t i) {
      values_[i] = price_portfolio(model, portfolio, std::exp(lo_ + step_ * i)).value;
    });
  }

  double operator()(double log_s) const {
    double u = std::clamp((log_s - lo_) / step_, 0.0, double(values_.size() - 1));
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), values_.size() - 2);
    double f = u - i;
    return (1.0 - f) * values_[i] + f * values_[i + 1];
  }

 private:
  double lo_, step_;
  std::vector<double> values_;
};

struct PathPlan {
  double t0 = 0.0;
  std::vector<double> times;
  double discount_horizon = 0.0;
  std::function<double(std::span<const double>)> payoff;  // on log-prices
};

}  // namespace

Eigen::MatrixXd simulate_monitoring(const LevyModel& model, const MonitoringSchedule& sched,
                                    std::int64_t n_paths, std::uint64_t seed) {
  validate_schedule(sched);
  if (n_paths < 1) throw NonPositiveInput("n_paths must be positive");
  IncrementSampler check(model);
  Eigen::MatrixXd out(n_paths, sched.size());
  std::int64_t blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
  parallel_for(blocks, [&](std::size_t b) {
    for_each_path(model, sched.dates, sched.t, n_paths, seed, b,
                  [&](std::int64_t i, std::span<const double> x) {
                    for (std::size_t k = 0; k < x.size(); ++k) out(i, k) = x[k];
                  });
  });
  return out;
}

MCResult mc_price(const ContractSpec& contract, const LevyModel& model, double spot,
                  std::int64_t n_paths, std::uint64_t seed) {
  validate_contract(contract);
  if (n_paths < 1) throw NonPositiveInput("n_paths must be positive");
  if (!(spot > 0.0)) throw NonPositiveInput("spot must be positive");
  IncrementSampler check(model);
  const double ln_s = std::log(spot);
  std::unique_ptr<ValueTable> table;

  PathPlan plan = std::visit(
      [&](const auto& c) -> PathPlan {
        using T = std::decay_t<decltype(c)>;
        PathPlan p;
        if constexpr (std::is_same_v<T, DigitalContract>) {
          p.t0 = c.schedule.t;
          p.times = c.schedule.dates;
          p.discount_horizon = c.schedule.expiry() - c.schedule.t;
          const PayoffParameterSet& q = c.payoff;
          p.payoff = [&q](std::span<const double> x) {
            Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
            Eigen::VectorXd cond = q.a * xv - q.k_log;
            for (int n = 0; n < q.n(); ++n) {
              if (q.w[n] * cond[n] < 0.0) return 0.0;
            }
            return std::exp(q.gamma.dot(xv));
          };
        } else if constexpr (std::is_same_v<T, ForwardStart>) {
          p.t0 = c.t;
          p.times = {c.t1, c.t2};
          p.discount_horizon = c.t2 - c.t;
          p.payoff = [w = c.w](std::span<const double> x) {
            return std::max(w * (std::exp(x[1]) - std::exp(x[0])), 0.0);
          };
        } else if constexpr (std::is_same_v<T, AsianGeometric>) {
          p.t0 = c.schedule.t;
          p.times = c.schedule.dates;
          p.discount_horizon = c.schedule.expiry() - c.schedule.t;
          std::vector<double> theta =
              c.weights.empty() ? std::vector<double>(c.schedule.size(), 1.0) : c.weights;
          double total = std::accumulate(theta.begin(), theta.end(), 0.0);
          for (double& v : theta) v /= total;
          p.payoff = [theta, k = c.strike, w = c.w](std::span<const double> x) {
            double avg = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) avg += theta[j] * x[j];
            return std::max(w * (std::exp(avg) - k), 0.0);
          };
        } else if constexpr (std::is_same_v<T, AsianContinuous>) {
          p.t0 = c.t;
          const int steps = 256;
          if (c.t_start > c.t) p.times.push_back(c.t_start);
          for (int i = 1; i <= steps; ++i) {
            p.times.push_back(c.t_start + (c.t_end - c.t_start) * i / steps);
          }
          p.discount_horizon = c.t_end - c.t;
          bool lead = c.t_start > c.t;
          p.payoff = [lead, ln_s, k = c.strike, w = c.w](std::span<const double> x) {
            // trapezoid over the averaging window; without a lead leg it starts at ln S_t
            std::size_t off = lead ? 1 : 0;
            double first = lead ? x[0] : ln_s;
            std::size_t n = x.size() - off;
            double sum = 0.5 * (first + x.back());
            for (std::size_t i = off; i + 1 < x.size(); ++i) sum += x[i];
            return std::max(w * (std::exp(sum / n) - k), 0.0);
          };
        } else if constexpr (std::is_same_v<T, LookbackFixed>) {
          p.t0 = c.schedule.t;
          p.times = c.schedule.dates;
          p.discount_horizon = c.schedule.expiry() - c.schedule.t;
          p.payoff = [k = c.strike, w = c.w](std::span<const double> x) {
            double best = w * k;
            for (double v : x) best = std::max(best, w * std::exp(v));
            return best - w * k;
          };
        } else if constexpr (std::is_same_v<T, Chooser>) {
          p.t0 = c.t;
          p.times = {c.t1, c.t_expiry};
          p.discount_horizon = c.t_expiry - c.t;
          double cut = c.strike * std::exp(-model.rate() * (c.t_expiry - c.t1));
          p.payoff = [cut, k = c.strike](std::span<const double> x) {
            double s1 = std::exp(x[0]), s2 = std::exp(x[1]);
            return s1 > cut ? std::max(s2 - k, 0.0) : std::max(k - s2, 0.0);
          };
        } else if constexpr (std::is_same_v<T, Compound>) {
          if (c.legs.size() > 2) throw NestingTooDeep("Monte Carlo compounds are limited to depth 2");
          p.t0 = c.t;
          const CompoundLeg& outer = c.legs.front();
          p.times = {outer.expiry};
          p.discount_horizon = outer.expiry - c.t;
          if (c.legs.size() == 1) {
            p.payoff = [outer](std::span<const double> x) {
              return std::max(outer.w * (std::exp(x[0]) - outer.strike), 0.0);
            };
          } else {
            Compound inner{outer.expiry, {c.legs[1]}};
            double sd = std::sqrt(std::max(1e-4, 2.0 * (outer.expiry - c.t) *
                                                     model.psi_unchecked(cplx{1.0, 0.0}).real()));
            double spread = 12.0 * sd + 1.0;
            table = std::make_unique<ValueTable>(inner, model, ln_s - spread, ln_s + spread);
            const ValueTable* f = table.get();
            p.payoff = [outer, f](std::span<const double> x) {
              return std::max(outer.w * ((*f)(x[0]) - outer.strike), 0.0);
            };
          }
        } else {
          static_assert(std::is_same_v<T, BarrierDownOutCall>);
          p.t0 = c.schedule.t;
          p.times = c.schedule.dates;
          p.discount_horizon = c.schedule.expiry() - c.schedule.t;
          p.payoff = [b = std::log(c.barrier), k = c.strike](std::span<const double> x) {
            for (std::size_t j = 0; j + 1 < x.size(); ++j) {
              if (x[j] <= b) return 0.0;
            }
            return std::max(std::exp(x.back()) - k, 0.0);
          };
        }
        return p;
      },
      contract);

  std::int64_t blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
  std::vector<Moments> parts(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> level(plan.times.size());
    for_each_path(model, plan.times, plan.t0, n_paths, seed, b,
                  [&](std::int64_t, std::span<const double> x) {
                    for (std::size_t k = 0; k < x.size(); ++k) level[k] = ln_s + x[k];
                    parts[b].add(plan.payoff(level));
                  });
  });
  Moments total;
  for (const auto& m : parts) total.merge(m);
  double discount = std::exp(-model.rate() * plan.discount_horizon);
  MCResult out;
  out.estimate = discount * total.mean;
  double var = total.n > 1 ? std::max(0.0, total.m2 / (total.n - 1)) : 0.0;
  out.std_error = discount * std::sqrt(var / total.n);
  out.n_paths = n_paths;
  out.seed = seed;
  return out;
}

}  // namespace levyx
