#pragma once

#include <string>
#include <variant>

#include "levyx/numerics.hpp"

namespace levyx {

struct GaussianParams {
  double sigma = 0.0;
};

struct NigParams {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
};

/// CGMY with activity y in ]0,1[ or ]1,2[.
struct CgmyParams {
  double c = 0.0;
  double g = 0.0;
  double m = 0.0;
  double y = 0.0;
};

using ModelParams = std::variant<GaussianParams, NigParams, CgmyParams>;

/// Open interval of admissible Im(xi).
struct Strip {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;

  bool contains(double im) const { return im > lambda_minus && im < lambda_plus; }
};

/// Inlined evaluators of the full exponent psi (drift included), used by the
/// quadrature kernels through LevyModel::visit_psi.
struct GaussianPsi {
  double mu, half_var;
  cplx operator()(cplx xi) const { return xi * (half_var * xi - kI * mu); }
};

struct NigPsi {
  double mu, alpha2, beta, delta, shift;
  cplx operator()(cplx xi) const {
    cplx b = beta + kI * xi;
    return -kI * mu * xi + delta * std::sqrt(alpha2 - b * b) - shift;
  }
};

struct CgmyPsi {
  double mu, scale, g, m, y, shift;
  cplx operator()(cplx xi) const {
    cplx ixi = kI * xi;
    return -mu * ixi + scale * (std::pow(m - ixi, y) + std::pow(g + ixi, y) - shift);
  }
};

/// Characteristic exponent psi(xi) = -i mu xi + phi(xi) of a Levy process,
/// E[exp(i xi X_t)] = exp(-t psi(xi)). Immutable once built.
class LevyModel {
 public:
  static constexpr double kDefaultGaussianStrip = 50.0;

  /// Builds a model with an explicit drift. Throws InvalidModel on bad
  /// parameters; the strip condition lambda_minus < -1 is not checked here.
  LevyModel(ModelParams params, double mu, double r,
            double gaussian_strip = kDefaultGaussianStrip);

  const ModelParams& params() const { return params_; }
  /// "gaussian", "nig" or "cgmy".
  std::string kind() const;
  double mu() const { return mu_; }
  double rate() const { return r_; }
  const Strip& strip() const { return strip_; }
  /// Growth order: Re psi(xi) ~ decay_constant() * |xi|^order() on the real line.
  double order() const;
  double decay_constant() const;

  /// psi(xi); throws StripViolation unless Im(xi) is inside the open strip.
  cplx psi(cplx xi) const;
  /// psi(xi) without the strip check, for hot loops that validated the contour.
  cplx psi_unchecked(cplx xi) const {
    return std::visit([xi](const auto& f) { return f(xi); }, evaluator_);
  }
  /// Drift-free part phi(xi).
  cplx phi(cplx xi) const { return psi_unchecked(xi) + kI * mu_ * xi; }

  /// Calls f with the concrete evaluator (GaussianPsi, NigPsi or CgmyPsi).
  template <class F>
  decltype(auto) visit_psi(F&& f) const {
    return std::visit(std::forward<F>(f), evaluator_);
  }

  /// |r + psi(-i)|, zero for a risk-neutral model.
  double emm_residual() const;

 private:
  ModelParams params_;
  double mu_;
  double r_;
  Strip strip_;
  std::variant<GaussianPsi, NigPsi, CgmyPsi> evaluator_;
};

/// Risk-neutral model by mean correction: mu = r + phi(-i). Throws
/// InvalidModel or StripTooNarrow (lambda_minus >= -1).
LevyModel make_model(const ModelParams& params, double r,
                     double gaussian_strip = LevyModel::kDefaultGaussianStrip);

/// Physical-measure model with a free drift mu_p (E[X_t] = mu_p t for the
/// Gaussian case).
LevyModel make_historic_model(const ModelParams& params, double mu_p, double r,
                              double gaussian_strip = LevyModel::kDefaultGaussianStrip);

struct EsscherResult {
  LevyModel model;
  double h;
};

/// Solves psi_P(-ih) - psi_P(-ih-i) = r and returns the tilted model
/// psi_Q(xi) = psi_P(xi - ih) - psi_P(-ih). Throws NoRoot if the equation
/// has no solution with both tilts inside the historic strip.
EsscherResult esscher_calibrate(const LevyModel& historic, double r);

}  // namespace levyx
