#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace levyx {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

// Standard normal helpers.
double norm_pdf(double x);
double norm_cdf(double x);
/// Inverse of norm_cdf, accurate to full double precision on (0, 1).
double norm_inv(double p);

/// Neumaier-compensated accumulator; summation order is the caller's.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

template <>
inline void CompensatedSum<cplx>::add(cplx x) {
  // component-wise Neumaier
  auto step = [](double& s, double& c, double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      c += (s - t) + v;
    } else {
      c += (v - t) + s;
    }
    s = t;
  };
  double sr = sum_.real(), si = sum_.imag(), cr = comp_.real(), ci = comp_.imag();
  step(sr, cr, x.real());
  step(si, ci, x.imag());
  sum_ = {sr, si};
  comp_ = {cr, ci};
}

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n), cached per n.
const GaussLegendreRule& gauss_legendre(int n);

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. Deterministic: the
/// interval with the largest error is bisected, ties broken by position.
IntegralEstimate integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol = 0.0, int max_intervals = 200);

/// Brent's root finder on a sign-changing bracket. Throws NoRoot if f(a) and
/// f(b) share a sign.
double find_root(const std::function<double(double)>& f, double a, double b, double x_tol,
                 double f_tol = 0.0, int max_iter = 200);

/// Root of f on ]0, inf[ for f monotone in s: grows the bracket geometrically
/// from s0 by factors 2^k, k <= max_doublings, then runs Brent in log space to
/// relative tolerance rel_tol. Throws NoRoot when no sign change is found.
double find_root_geometric(const std::function<double(double)>& f, double s0, double rel_tol,
                           int max_doublings = 60);

/// Golden-section minimiser for a unimodal f on [a, b].
double minimize_unimodal(const std::function<double(double)>& f, double a, double b, double x_tol,
                         int max_iter = 200);

/// Runs task(i) for i in [0, n_tasks) on up to hardware_concurrency threads.
/// Callers store per-task results by index so the reduction order is fixed.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace levyx
