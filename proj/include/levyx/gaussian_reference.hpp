#pragma once

#include <Eigen/Dense>

#include "levyx/exotic_contracts.hpp"

namespace levyx {

/// Throws NotPSD unless c is a symmetric unit-diagonal matrix with smallest
/// eigenvalue >= -1e-10, DimensionTooLarge above 6.
void validate_correlation(const Eigen::MatrixXd& c);

/// P(Z_1 <= d_1, ..., Z_N <= d_N) for standard normals with correlation c.
/// Infinite entries of d are allowed.
double mvn_cdf(const Eigen::VectorXd& d, const Eigen::MatrixXd& c);

/// Bivariate normal CDF.
double bvn_cdf(double h, double k, double rho);

/// (2 pi i)^-N times the integral of exp(i xi.d - xi'C xi / 2) / prod xi_k
/// along Im xi_k = -w_k omega_k. N <= 3.
double lemma1_contour_side(const Eigen::VectorXd& d, const Eigen::MatrixXd& c,
                           const Eigen::VectorXi& w, const Eigen::VectorXd& omega,
                           double tol = 1e-9);

/// Black-Scholes price of max(w (S_T - K), 0) with tau = T - t.
double black_scholes(double spot, double strike, double tau, double sigma, double r, int w);

/// Power digital under geometric Brownian motion by exponential tilting and
/// the multivariate normal CDF.
double gaussian_power_digital(double sigma, double r, const MonitoringSchedule& sched,
                              const PayoffParameterSet& p, double spot);

/// Geske-style critical prices S_1*, ..., S_N* of a compound under GBM.
std::vector<double> gaussian_compound_thresholds(const Compound& c, double sigma, double r);

/// Closed-form price under geometric Brownian motion. Lookback and barrier
/// are limited to three monitoring dates, compounds to depth three, all other
/// multivariate terms to six dimensions (UnsupportedContract otherwise).
double closed_form_price(const ContractSpec& c, double sigma, double r, double spot);

}  // namespace levyx
