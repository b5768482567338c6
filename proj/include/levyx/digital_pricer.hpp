#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "levyx/levy_model.hpp"

namespace levyx {

/// Valuation time t and monitoring dates t < T_1 < ... < T_M.
struct MonitoringSchedule {
  double t = 0.0;
  std::vector<double> dates;

  int size() const { return static_cast<int>(dates.size()); }
  double expiry() const { return dates.back(); }
};

/// Multi-period power digital: payoff prod_k S_{T_k}^{gamma_k} times the
/// indicator that w_n (a_n . X - k_log_n) >= 0 for every row n, where X_k is
/// the log-price at T_k.
struct PayoffParameterSet {
  Eigen::VectorXd gamma;  // M
  Eigen::VectorXd k_log;  // N
  Eigen::VectorXi w;      // N, entries +-1
  Eigen::MatrixXd a;      // N x M

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(a.cols()); }
};

/// Positive distances of the integration lines from the real axis; line n
/// sits at Im(xi_n) = -w_n * omega_n.
struct ContourOffsets {
  Eigen::VectorXd omega;
};

struct PriceResult {
  double value = 0.0;
  double quadrature_error = 0.0;
  ContourOffsets offsets_used;
  int n = 0;
  int m = 0;
  std::int64_t evaluations = 0;
};

struct PricingOptions {
  /// Absolute quadrature tolerance in units of the unconditional power-claim
  /// value. Zero selects 1e-8 for one-dimensional and 1e-6 for larger problems.
  double tol = 0.0;
  std::int64_t max_evaluations = std::int64_t{1} << 28;
  /// Allow rewriting deep in-the-money conditions through indicator complements.
  bool allow_complements = true;
  /// When positive, every axis uses this many trapezoid panels with no
  /// refinement; the error estimate is then the difference to the half grid.
  int fixed_panels = 0;
};

void validate_schedule(const MonitoringSchedule& sched);
void validate_payoff(const PayoffParameterSet& p, int m);

/// Sum_j (T_j - T_{j-1}) psi(zeta_j) with zeta_j = sum_n sum_{k>=j} a_nk xi_n
/// - i sum_{k>=j} gamma_k. Throws StripViolation naming the leg.
cplx psi_aggregate(const LevyModel& model, const MonitoringSchedule& sched,
                   const PayoffParameterSet& p, std::span<const cplx> xi);

/// True when every leg of the offsets lies strictly inside the strip.
bool offsets_feasible(const LevyModel& model, const PayoffParameterSet& p,
                      const ContourOffsets& offsets);

/// Equal offsets at the midpoint of the feasible interval of the scalar
/// problem. Throws NoFeasibleOffsets when that interval is empty.
ContourOffsets default_offsets(const LevyModel& model, const PayoffParameterSet& p);

/// Multi-period power digital price. Without offsets the engine picks its own
/// contours (and may use indicator complements); explicit offsets are used as
/// given on the natural side of every pole.
PriceResult price_digital(const LevyModel& model, const MonitoringSchedule& sched,
                          const PayoffParameterSet& p, double spot,
                          const std::optional<ContourOffsets>& offsets = std::nullopt,
                          const PricingOptions& options = {});

/// One-date power digital S_T^gamma 1(w (a X_T - k_log) >= 0) on a separate
/// one-dimensional code path.
PriceResult price_single_period(const LevyModel& model, double t, double expiry, double gamma,
                                double a, int w, double k_log, double spot, double tol = 1e-10);

/// dPrice/dSpot by differentiating under the integral.
double delta(const LevyModel& model, const MonitoringSchedule& sched, const PayoffParameterSet& p,
             double spot, const PricingOptions& options = {});

}  // namespace levyx
