#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "levyx/exotic_contracts.hpp"

namespace levyx {

struct MCResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
};

/// Paths are generated in fixed blocks of this many, each block with its own
/// generator, so path i does not depend on the total path count.
inline constexpr std::int64_t kPathsPerBlock = 4096;

/// Log-returns X_{T_k} - X_t at the monitoring dates, one row per path.
/// Gaussian and NIG only (UnsupportedModel otherwise).
Eigen::MatrixXd simulate_monitoring(const LevyModel& model, const MonitoringSchedule& sched,
                                    std::int64_t n_paths, std::uint64_t seed);

/// Discounted sample mean of the pathwise payoff. Depth-2 compounds value the
/// inner option with the Fourier engine on a grid at T_1 (NestingTooDeep above
/// depth 2). The continuous Asian is approximated by a 256-step trapezoid
/// average of the log-price.
MCResult mc_price(const ContractSpec& c, const LevyModel& model, double spot, std::int64_t n_paths,
                  std::uint64_t seed);

}  // namespace levyx
