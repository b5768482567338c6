#pragma once

#include <variant>
#include <vector>

#include "levyx/digital_pricer.hpp"

namespace levyx {

/// A plain multi-period power digital.
struct DigitalContract {
  MonitoringSchedule schedule;
  PayoffParameterSet payoff;
};

/// max(w (S_{T2} - S_{T1}), 0).
struct ForwardStart {
  double t = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  int w = 1;
};

/// max(w (prod S_{T_j}^{theta_j} - K), 0); empty weights mean equal weights.
struct AsianGeometric {
  MonitoringSchedule schedule;
  double strike = 0.0;
  int w = 1;
  std::vector<double> weights;
};

/// Geometric average of S over [t_start, t_end] in continuous time.
struct AsianContinuous {
  double t = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double strike = 0.0;
  int w = 1;
};

/// max(w S_{T_1}, ..., w S_{T_M}, w K) - w K.
struct LookbackFixed {
  MonitoringSchedule schedule;
  double strike = 0.0;
  int w = 1;
};

/// Simple chooser: at t1 pick the call or the put, both struck at K expiring at t_expiry.
struct Chooser {
  double t = 0.0;
  double t1 = 0.0;
  double t_expiry = 0.0;
  double strike = 0.0;
};

struct CompoundLeg {
  double expiry = 0.0;
  double strike = 0.0;
  int w = 1;
};

/// N-fold compound; legs[0] is the outermost option, legs.back() the option
/// on the stock.
struct Compound {
  double t = 0.0;
  std::vector<CompoundLeg> legs;
};

/// (S_{T_M} - K)^+ unless S_{T_j} <= B at some monitoring date.
struct BarrierDownOutCall {
  MonitoringSchedule schedule;
  double barrier = 0.0;
  double strike = 0.0;
};

using ContractSpec = std::variant<DigitalContract, ForwardStart, AsianGeometric, AsianContinuous,
                                  LookbackFixed, Chooser, Compound, BarrierDownOutCall>;

/// Name used in spec files ("digital", "forward_start", ...).
const char* contract_type_name(const ContractSpec& c);

/// Validates times, strikes and signs; throws InvalidContract or CapExceeded.
void validate_contract(const ContractSpec& c);

struct PortfolioTerm {
  double coefficient = 0.0;
  MonitoringSchedule schedule;
  PayoffParameterSet payoff;
};

struct DigitalPortfolio {
  std::vector<PortfolioTerm> terms;
  double cash = 0.0;  // already discounted
};

/// Static replication by power digitals. The model is used only to solve
/// compound exercise thresholds. Throws UnsupportedContract for
/// AsianContinuous, which has no finite decomposition.
DigitalPortfolio to_portfolio(const ContractSpec& c, const LevyModel& model, double spot);

/// Critical prices S_1*, ..., S_N* (S_N* = K_N).
std::vector<double> solve_compound_thresholds(const Compound& c, const LevyModel& model,
                                              const PricingOptions& options = {});

/// Compound portfolio for given thresholds.
DigitalPortfolio compound_portfolio(const Compound& c, const std::vector<double>& thresholds);

PriceResult price_portfolio(const LevyModel& model, const DigitalPortfolio& portfolio, double spot,
                            const PricingOptions& options = {});

PriceResult price_contract(const ContractSpec& c, const LevyModel& model, double spot,
                           const PricingOptions& options = {});

/// int_0^1 psi(xi (1 - y)) dy by 64-point Gauss-Legendre.
cplx continuous_asian_psi(const LevyModel& model, cplx xi);

/// Continuous geometric Asian by its one-dimensional integral.
PriceResult price_asian_continuous(const AsianContinuous& c, const LevyModel& model, double spot,
                                   double tol = 1e-10);

/// Simple chooser through four one-date digitals (call on K at expiry plus a
/// put on K e^{-r(T - T1)} at the choice date).
PriceResult price_chooser_simplified(const Chooser& c, const LevyModel& model, double spot,
                                     const PricingOptions& options = {});

/// F2(call on option) - F2(put on option) - F1 + K1 e^{-r(T1 - t)}; zero up to
/// numerical error.
double compound_parity_check(const LevyModel& model, double t, double k1, double t1, double k2,
                             double t2, int w2, double spot, const PricingOptions& options = {});

}  // namespace levyx
