#include "levyx/levy_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "levyx/errors.hpp"

namespace levyx {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

LevyModel::LevyModel(ModelParams params, double mu, double r, double gaussian_strip)
    : params_(std::move(params)), mu_(mu), r_(r) {
  if (!finite_all({mu, r})) throw InvalidModel("drift and rate must be finite");
  std::visit(
      overloaded{
          [&](const GaussianParams& p) {
            if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
              throw InvalidModel("gaussian sigma must be positive");
            }
            if (!(gaussian_strip > 1.0)) throw InvalidModel("gaussian strip proxy must exceed 1");
            strip_ = {-gaussian_strip, gaussian_strip};
            evaluator_ = GaussianPsi{mu_, 0.5 * p.sigma * p.sigma};
          },
          [&](const NigParams& p) {
            if (!finite_all({p.alpha, p.beta, p.delta}) || !(p.alpha > 0.0) ||
                !(std::abs(p.beta) < p.alpha) || !(p.delta > 0.0)) {
              throw InvalidModel("nig requires alpha > 0, |beta| < alpha, delta > 0");
            }
            strip_ = {p.beta - p.alpha, p.beta + p.alpha};
            evaluator_ = NigPsi{mu_, p.alpha * p.alpha, p.beta, p.delta,
                                p.delta * std::sqrt(p.alpha * p.alpha - p.beta * p.beta)};
          },
          [&](const CgmyParams& p) {
            if (!finite_all({p.c, p.g, p.m, p.y}) || !(p.c > 0.0) || !(p.g > 0.0) ||
                !(p.m > 0.0) || !(p.y > 0.0 && p.y < 2.0) || p.y == 1.0) {
              throw InvalidModel("cgmy requires c, g, m > 0 and y in ]0,1[ or ]1,2[");
            }
            strip_ = {-p.m, p.g};
            evaluator_ = CgmyPsi{mu_, -p.c * std::tgamma(-p.y), p.g, p.m, p.y,
                                 std::pow(p.m, p.y) + std::pow(p.g, p.y)};
          },
      },
      params_);
}

std::string LevyModel::kind() const {
  return std::visit(overloaded{[](const GaussianParams&) { return std::string("gaussian"); },
                               [](const NigParams&) { return std::string("nig"); },
                               [](const CgmyParams&) { return std::string("cgmy"); }},
                    params_);
}

double LevyModel::order() const {
  return std::visit(overloaded{[](const GaussianParams&) { return 2.0; },
                               [](const NigParams&) { return 1.0; },
                               [](const CgmyParams& p) { return p.y; }},
                    params_);
}

double LevyModel::decay_constant() const {
  return std::visit(
      overloaded{[](const GaussianParams& p) { return 0.5 * p.sigma * p.sigma; },
                 [](const NigParams& p) { return p.delta; },
                 [](const CgmyParams& p) {
                   return 2.0 * p.c * std::abs(std::tgamma(-p.y) * std::cos(0.5 * kPi * p.y));
                 }},
      params_);
}

cplx LevyModel::psi(cplx xi) const {
  if (!strip_.contains(xi.imag())) {
    std::ostringstream msg;
    msg << "Im(xi) = " << xi.imag() << " outside strip ]" << strip_.lambda_minus << ", "
        << strip_.lambda_plus << "[";
    throw StripViolation(msg.str());
  }
  return psi_unchecked(xi);
}

double LevyModel::emm_residual() const { return std::abs(r_ + psi(cplx{0.0, -1.0})); }

LevyModel make_model(const ModelParams& params, double r, double gaussian_strip) {
  LevyModel driftless(params, 0.0, r, gaussian_strip);
  if (!(driftless.strip().lambda_minus < -1.0)) {
    std::ostringstream msg;
    msg << "lambda_minus = " << driftless.strip().lambda_minus
        << " must be < -1 for the forward to exist";
    throw StripTooNarrow(msg.str());
  }
  double mu = r + driftless.phi(cplx{0.0, -1.0}).real();
  return LevyModel(params, mu, r, gaussian_strip);
}

LevyModel make_historic_model(const ModelParams& params, double mu_p, double r,
                              double gaussian_strip) {
  return LevyModel(params, mu_p, r, gaussian_strip);
}

EsscherResult esscher_calibrate(const LevyModel& historic, double r) {
  const Strip& s = historic.strip();
  // f(h) = psi_P(-ih) - psi_P(-ih-i) - r is increasing in h (convex cumulant).
  auto f = [&](double h) {
    return (historic.psi_unchecked(cplx{0.0, -h}) - historic.psi_unchecked(cplx{0.0, -h - 1.0}))
               .real() -
           r;
  };
  double lo = -s.lambda_plus, hi = -s.lambda_minus - 1.0;
  if (!(lo < hi)) throw NoRoot("historic strip narrower than one unit, no Esscher tilt exists");
  double inset = 1e-9 * (hi - lo);
  lo += inset;
  hi -= inset;
  double h = find_root(f, lo, hi, 1e-15, 1e-14, 400);
  if (std::abs(f(h)) > 1e-12) {
    throw NoRoot("Esscher equation residual " + std::to_string(f(h)) + " above 1e-12");
  }

  double mu = historic.mu();
  ModelParams tilted = std::visit(
      overloaded{
          [&](const GaussianParams& p) -> ModelParams {
            mu += p.sigma * p.sigma * h;
            return p;
          },
          [&](const NigParams& p) -> ModelParams { return NigParams{p.alpha, p.beta + h, p.delta}; },
          [&](const CgmyParams& p) -> ModelParams {
            return CgmyParams{p.c, p.g + h, p.m - h, p.y};
          },
      },
      historic.params());
  double proxy = std::holds_alternative<GaussianParams>(tilted) ? s.lambda_plus
                                                                : LevyModel::kDefaultGaussianStrip;
  // The tilted drift equals the mean-corrected one up to the root residual;
  // use the mean-corrected value so the EMM condition holds to rounding.
  LevyModel q = make_model(tilted, r, proxy);
  if (std::abs(q.mu() - mu) > 1e-9 * (1.0 + std::abs(mu))) {
    throw NoRoot("tilted drift inconsistent with the EMM condition");
  }
  return {q, h};
}

}  // namespace levyx
