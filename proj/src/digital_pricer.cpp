#include "levyx/digital_pricer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyx/contour_quadrature.hpp"
#include "levyx/errors.hpp"

namespace levyx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Allowed growth of the integrand bound when the contour is shifted by the
// analyticity half-width used for the step size.
constexpr double kGrowthBudget = 4.0;
constexpr double kComplementPenalty = 2.0;

// Everything the contour integral needs, in the increment form: condition n is
// w_n (D_n + sum_j c_nj dX_j) >= 0 and the payoff factor is
// spot^G_1 exp(sum_j G_j dX_j), dX_j being the increment over leg j.
struct Problem {
  Eigen::VectorXd tau;  // M leg lengths
  Eigen::MatrixXd c;    // N x M suffix sums of a
  Eigen::VectorXd g;    // M suffix sums of gamma
  Eigen::VectorXd row_sum;
  Eigen::VectorXd d;
  Eigen::VectorXi w;
  double discount = 1.0;
  double spot = 1.0;

  int n() const { return static_cast<int>(c.rows()); }
  int m() const { return static_cast<int>(c.cols()); }
};

Problem make_problem(const LevyModel& model, const MonitoringSchedule& sched,
                     const PayoffParameterSet& p, double spot) {
  const int n = p.n(), m = p.m();
  Problem pr;
  pr.tau.resize(m);
  for (int j = 0; j < m; ++j) pr.tau[j] = sched.dates[j] - (j == 0 ? sched.t : sched.dates[j - 1]);
  pr.c.resize(n, m);
  pr.g.resize(m);
  for (int j = m - 1; j >= 0; --j) {
    pr.c.col(j) = p.a.col(j);
    if (j + 1 < m) pr.c.col(j) += pr.c.col(j + 1);
    pr.g[j] = p.gamma[j] + (j + 1 < m ? pr.g[j + 1] : 0.0);
  }
  pr.row_sum = p.a.rowwise().sum();
  pr.d = pr.row_sum * std::log(spot) - p.k_log;
  pr.w = p.w;
  pr.discount = std::exp(-model.rate() * (sched.expiry() - sched.t));
  pr.spot = spot;
  return pr;
}

// Keeps the listed rows; rows flagged in `negate` get the opposite sign w.
Problem reduce(const Problem& pr, const std::vector<int>& keep, const std::vector<bool>& negate) {
  Problem out = pr;
  const int k = static_cast<int>(keep.size());
  out.c.resize(k, pr.m());
  out.row_sum.resize(k);
  out.d.resize(k);
  out.w.resize(k);
  for (int i = 0; i < k; ++i) {
    out.c.row(i) = pr.c.row(keep[i]);
    out.row_sum[i] = pr.row_sum[keep[i]];
    out.d[i] = pr.d[keep[i]];
    out.w[i] = negate[keep[i]] ? -pr.w[keep[i]] : pr.w[keep[i]];
  }
  return out;
}

Eigen::VectorXd leg_imag(const Problem& pr, const Eigen::VectorXd& b) {
  return pr.c.transpose() * b - pr.g;
}

// Log of the integrand's modulus bound on the lines Im xi = b (attained at
// Re xi = 0): -b.D - sum tau_j psi(i y_j) - sum ln|b_n|. +inf when infeasible.
double line_bound(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& b) {
  Eigen::VectorXd y = leg_imag(pr, b);
  double v = -b.dot(pr.d);
  for (int j = 0; j < pr.m(); ++j) {
    if (!model.strip().contains(y[j])) return kInf;
    v -= pr.tau[j] * model.psi_unchecked(cplx{0.0, y[j]}).real();
  }
  for (int i = 0; i < pr.n(); ++i) {
    if (b[i] == 0.0) return kInf;
    v -= std::log(std::abs(b[i]));
  }
  return v;
}

double strip_barrier(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& b) {
  Eigen::VectorXd y = leg_imag(pr, b);
  const Strip& s = model.strip();
  double v = 0.0;
  for (int j = 0; j < pr.m(); ++j) {
    if (!s.contains(y[j])) return kInf;
    v -= std::log(y[j] - s.lambda_minus) + std::log(s.lambda_plus - y[j]);
  }
  return v;
}

struct Interval {
  double lo = -kInf;
  double hi = kInf;
  int limiting_leg = -1;

  bool empty() const { return !(lo < hi); }
  void clip_lo(double v, int leg) {
    if (v > lo) {
      lo = v;
      if (empty() && limiting_leg < 0) limiting_leg = leg;
    }
  }
  void clip_hi(double v, int leg) {
    if (v < hi) {
      hi = v;
      if (empty() && limiting_leg < 0) limiting_leg = leg;
    }
  }
};

// Feasible s > 0 with b = sigma * s.
Interval scalar_interval(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& sigma) {
  Interval iv{0.0, kInf, -1};
  const Strip& st = model.strip();
  for (int j = 0; j < pr.m(); ++j) {
    double k = pr.c.col(j).dot(sigma);
    // lambda_minus < s k - g_j < lambda_plus
    if (k > 0.0) {
      iv.clip_lo((st.lambda_minus + pr.g[j]) / k, j);
      iv.clip_hi((st.lambda_plus + pr.g[j]) / k, j);
    } else if (k < 0.0) {
      iv.clip_lo((st.lambda_plus + pr.g[j]) / k, j);
      iv.clip_hi((st.lambda_minus + pr.g[j]) / k, j);
    } else if (!st.contains(-pr.g[j])) {
      iv.hi = iv.lo;
      iv.limiting_leg = j;
    }
    if (iv.empty()) {
      if (iv.limiting_leg < 0) iv.limiting_leg = j;
      return iv;
    }
  }
  return iv;
}

// Feasible values of b_n with the others fixed, on the half-line of sign sigma_n.
Interval axis_interval(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& b, int n,
                       double sigma_n) {
  Interval iv = sigma_n > 0 ? Interval{0.0, kInf, -1} : Interval{-kInf, 0.0, -1};
  const Strip& st = model.strip();
  Eigen::VectorXd y = leg_imag(pr, b);
  for (int j = 0; j < pr.m(); ++j) {
    double k = pr.c(n, j);
    if (k == 0.0) continue;
    double rest = y[j] - k * b[n];
    double e1 = (st.lambda_minus - rest) / k, e2 = (st.lambda_plus - rest) / k;
    iv.clip_lo(std::min(e1, e2), j);
    iv.clip_hi(std::max(e1, e2), j);
  }
  return iv;
}

// Minimises bound + strip barrier over the orthant sign(b) = sigma.
std::optional<Eigen::VectorXd> optimize_offsets(const LevyModel& model, const Problem& pr,
                                                const Eigen::VectorXd& sigma) {
  auto objective = [&](const Eigen::VectorXd& b) {
    double v = line_bound(model, pr, b);
    return std::isfinite(v) ? v + strip_barrier(model, pr, b) : kInf;
  };
  Interval s_iv = scalar_interval(model, pr, sigma);
  if (s_iv.empty()) return std::nullopt;
  if (!std::isfinite(s_iv.hi)) s_iv.hi = s_iv.lo + 50.0;
  auto inset = [](Interval iv) {
    double pad = 1e-9 * (iv.hi - iv.lo);
    return std::pair{iv.lo + pad, iv.hi - pad};
  };
  auto [s_lo, s_hi] = inset(s_iv);
  double s = minimize_unimodal([&](double v) { return objective(sigma * v); }, s_lo, s_hi,
                               1e-9 * (1.0 + s_hi));
  Eigen::VectorXd b = sigma * s;
  double best = objective(b);
  if (!std::isfinite(best)) return std::nullopt;
  if (pr.n() == 1) return b;

  for (int sweep = 0; sweep < 40; ++sweep) {
    double before = best;
    for (int n = 0; n < pr.n(); ++n) {
      Interval iv = axis_interval(model, pr, b, n, sigma[n]);
      if (iv.empty()) continue;
      if (!std::isfinite(iv.lo)) iv.lo = iv.hi - 100.0;
      if (!std::isfinite(iv.hi)) iv.hi = iv.lo + 100.0;
      auto [lo, hi] = inset(iv);
      Eigen::VectorXd trial = b;
      double x = minimize_unimodal(
          [&](double v) {
            trial[n] = v;
            return objective(trial);
          },
          lo, hi, 1e-9 * (1.0 + std::abs(hi) + std::abs(lo)));
      trial[n] = x;
      double val = objective(trial);
      if (val < best) {
        best = val;
        b = trial;
      }
    }
    if (before - best < 1e-9) break;
  }
  return b;
}

// Effective time scale of the decay along axis n: the smallest value of
// sum_j tau_j |c_j . x|^order over x with x_n = 1.
Eigen::VectorXd effective_tau(const Problem& pr, double order) {
  const int n = pr.n(), m = pr.m();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < m; ++j) h += pr.tau[j] * pr.c.col(j) * pr.c.col(j).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw InvalidPayoff("exercise conditions are linearly dependent over the monitoring legs");
  }
  Eigen::MatrixXd h_inv = h.inverse();
  auto cost = [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (int j = 0; j < m; ++j) v += pr.tau[j] * std::pow(std::abs(pr.c.col(j).dot(x)), order);
    return v;
  };
  Eigen::VectorXd out(n);
  for (int axis = 0; axis < n; ++axis) {
    Eigen::VectorXd x_quad = h_inv.col(axis) / h_inv(axis, axis);
    double best = cost(x_quad);
    if (order < 2.0 - 1e-12 && n > 1) {
      // vertices: n-1 legs annihilated
      std::vector<int> pick(n - 1);
      std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n - 1) {
          Eigen::MatrixXd lhs(n - 1, n - 1);
          Eigen::VectorXd rhs(n - 1);
          for (int r = 0; r < n - 1; ++r) {
            int col = 0;
            for (int i = 0; i < n; ++i) {
              if (i == axis) continue;
              lhs(r, col++) = pr.c(i, pick[r]);
            }
            rhs[r] = -pr.c(axis, pick[r]);
          }
          Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
          if (!lu.isInvertible()) return;
          Eigen::VectorXd sol = lu.solve(rhs);
          Eigen::VectorXd x(n);
          for (int i = 0, col = 0; i < n; ++i) x[i] = (i == axis) ? 1.0 : sol[col++];
          best = std::min(best, cost(x));
          return;
        }
        for (int j = start; j < m; ++j) {
          pick[depth] = j;
          rec(j + 1, depth + 1);
        }
      };
      rec(0, 0);
    }
    out[axis] = best;
  }
  return out;
}

struct TermResult {
  double value = 0.0;
  double error = 0.0;
  std::int64_t evaluations = 0;
  Eigen::VectorXd offsets;
};

// Integrand of one term in sheared coordinates xi = T eta:
// |det T| exp(i xi.D - Psi(xi) - scale_log) / prod(2 pi xi_n), optionally
// times (G_1 + i xi.R) for the spot derivative.
template <class Psi>
class EngineIntegrand final : public LineIntegrand {
 public:
  EngineIntegrand(Psi psi, const Problem& pr, const Eigen::MatrixXd& shear, double scale_log,
                  bool with_delta)
      : psi_(psi),
        pr_(pr),
        t_(shear),
        cp_(shear.transpose() * pr.c),
        dp_(shear.transpose() * pr.d),
        rp_(shear.transpose() * pr.row_sum),
        with_delta_(with_delta) {
    const int n = pr.n();
    constant_ = std::abs(shear.determinant()) * std::exp(-scale_log) / std::pow(kTwoPi, n);
    for (int j = 0; j < pr.m(); ++j) (cp_(0, j) != 0.0 ? inner_legs_ : outer_legs_).push_back(j);
    for (int i = 0; i < n; ++i) (t_(i, 0) != 0.0 ? inner_poles_ : outer_poles_).push_back(i);
  }

  void set_grid(const std::vector<std::vector<cplx>>& nodes) override {
    nodes_ = &nodes;
    phases_.assign(nodes.size(), {});
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      phases_[a].resize(nodes[a].size());
      for (std::size_t k = 0; k < nodes[a].size(); ++k) {
        phases_[a][k] = std::exp(kI * nodes[a][k] * dp_[a]);
      }
    }
  }

  void eval_line(std::span<const int> outer, std::span<cplx> out) const override {
    const auto& nodes = *nodes_;
    const int m = pr_.m(), n = pr_.n();
    cplx rest[64];
    cplx xi_rest[4];
    cplx prod = constant_;
    cplx delta_base = pr_.g[0];
    for (int j = 0; j < m; ++j) rest[j] = cplx{0.0, -pr_.g[j]};
    for (int i = 0; i < n; ++i) xi_rest[i] = 0.0;
    for (std::size_t a = 1; a < nodes.size(); ++a) {
      cplx eta = nodes[a][outer[a - 1]];
      prod *= phases_[a][outer[a - 1]];
      delta_base += kI * rp_[a] * eta;
      for (int j = 0; j < m; ++j) rest[j] += cp_(a, j) * eta;
      for (int i = 0; i < n; ++i) xi_rest[i] += t_(i, a) * eta;
    }
    for (int i : outer_poles_) prod /= xi_rest[i];
    cplx outer_exp = 0.0;
    for (int j : outer_legs_) outer_exp -= pr_.tau[j] * psi_(rest[j]);
    const auto& axis0 = nodes[0];
    for (std::size_t k = 0; k < out.size(); ++k) {
      cplx eta = axis0[k];
      cplx e = outer_exp;
      for (int j : inner_legs_) e -= pr_.tau[j] * psi_(cp_(0, j) * eta + rest[j]);
      cplx denom = 1.0;
      for (int i : inner_poles_) denom *= t_(i, 0) * eta + xi_rest[i];
      cplx v = prod * phases_[0][k] * std::exp(e) / denom;
      if (with_delta_) v *= delta_base + kI * rp_[0] * eta;
      out[k] = v;
    }
  }

 private:
  Psi psi_;
  const Problem& pr_;
  Eigen::MatrixXd t_, cp_;
  Eigen::VectorXd dp_, rp_;
  bool with_delta_;
  cplx constant_;
  std::vector<int> inner_legs_, outer_legs_, inner_poles_, outer_poles_;
  const std::vector<std::vector<cplx>>* nodes_ = nullptr;
  std::vector<std::vector<cplx>> phases_;
};

// Candidate coordinate systems: the identity and, for every ordering of the
// axes, the unit-triangular shear that diagonalises sum_j tau_j c_j c_j'.
std::vector<Eigen::MatrixXd> candidate_shears(const Problem& pr) {
  const int n = pr.n();
  std::vector<Eigen::MatrixXd> out{Eigen::MatrixXd::Identity(n, n)};
  if (n < 2) return out;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < pr.m(); ++j) h += pr.tau[j] * pr.c.col(j) * pr.c.col(j).transpose();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  do {
    Eigen::MatrixXd hp(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) hp(i, k) = h(perm[i], perm[k]);
    }
    // unpivoted LDL' by hand so the ordering is ours
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d(n);
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      double s = hp(k, k);
      for (int q = 0; q < k; ++q) s -= l(k, q) * l(k, q) * d[q];
      d[k] = s;
      if (!(s > 0.0)) ok = false;
      for (int i = k + 1; i < n && ok; ++i) {
        double v = hp(i, k);
        for (int q = 0; q < k; ++q) v -= l(i, q) * l(k, q) * d[q];
        l(i, k) = v / s;
      }
    }
    if (!ok) continue;
    Eigen::MatrixXd tp = l.transpose().inverse();
    Eigen::MatrixXd t(n, n);
    for (int i = 0; i < n; ++i) t.row(perm[i]) = tp.row(i);
    // the candidate is only useful if it is not the identity
    if ((t - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12) {
      for (auto& v : t.reshaped()) {
        if (std::abs(v) < 1e-14) v = 0.0;
      }
      out.push_back(t);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

struct GridPlan {
  Eigen::MatrixXd shear;
  ContourSpec spec;
  double cost = kInf;
  double log_volume = 0.0;
};

GridPlan plan_grid(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& b,
                   const Eigen::MatrixXd& shear, double bound, double excess, double tol) {
  const int n = pr.n(), m = pr.m();
  const Strip& strip = model.strip();
  GridPlan plan;
  plan.shear = shear;
  Problem sheared = pr;
  sheared.c = shear.transpose() * pr.c;
  Eigen::VectorXd tau_eff = effective_tau(sheared, model.order());
  Eigen::VectorXd eta_b = shear.fullPivLu().solve(b);
  Eigen::VectorXd y = leg_imag(pr, b);
  double cost = 1.0;
  for (int k = 0; k < n; ++k) {
    double trunc = truncation_radius(model.decay_constant(), model.order(), tau_eff[k],
                                     1e-2 * tol * std::exp(-excess));
    plan.log_volume += std::log(trunc / kPi);
    double dmax = kInf;
    for (int i = 0; i < n; ++i) {
      if (shear(i, k) != 0.0) dmax = std::min(dmax, std::abs(b[i] / shear(i, k)));
    }
    for (int j = 0; j < m; ++j) {
      double cj = std::abs(sheared.c(k, j));
      if (cj == 0.0) continue;
      double margin = std::min(y[j] - strip.lambda_minus, strip.lambda_plus - y[j]);
      dmax = std::min(dmax, margin / cj);
    }
    dmax *= 0.98;
    auto growth = [&](double shift) {
      Eigen::VectorXd up = b + shift * shear.col(k), down = b - shift * shear.col(k);
      return std::max(line_bound(model, pr, up), line_bound(model, pr, down)) - bound;
    };
    double d = dmax;
    if (!(growth(dmax) <= kGrowthBudget)) {
      double lo = 0.0, hi = dmax;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (growth(mid) <= kGrowthBudget ? lo : hi) = mid;
      }
      d = lo;
    }
    if (!(d > 0.0)) return plan;
    double h = kTwoPi * d / (std::log(1.0 / tol) + kGrowthBudget + 2.0 + excess);
    // the subgrid (step h) must already meet tol, so the grid itself uses h/2
    double panels = std::max(16.0, 2.0 * std::ceil(trunc / (0.5 * h)));
    if (panels > double(1 << 22)) return plan;
    plan.spec.offsets.push_back(eta_b[k]);
    plan.spec.truncation.push_back(trunc);
    plan.spec.nodes.push_back(static_cast<int>(panels));
    cost *= panels + 1.0;
  }
  if (n >= 3) cost *= 0.5;
  plan.cost = cost;
  return plan;
}

// Prices one term on the lines Im xi = b (no complements). With with_delta the
// returned value is the spot derivative instead.
TermResult price_term(const LevyModel& model, const Problem& pr, const Eigen::VectorXd& b,
                      double tol, const PricingOptions& options, bool with_delta) {
  TermResult res;
  res.offsets = b;
  const int n = pr.n(), m = pr.m();
  const Strip& strip = model.strip();
  const double g1 = pr.g[0];
  const double spot_pow = std::pow(pr.spot, g1);

  bool moment_exists = true;
  double moment_log = 0.0;
  for (int j = 0; j < m; ++j) {
    if (!strip.contains(-pr.g[j])) {
      moment_exists = false;
      break;
    }
    moment_log -= pr.tau[j] * model.psi_unchecked(cplx{0.0, -pr.g[j]}).real();
  }
  if (n == 0) {
    if (!moment_exists) {
      throw StripViolation("payoff moment exp(sum gamma_k X_k) is outside the strip");
    }
    res.value = pr.discount * spot_pow * std::exp(moment_log);
    if (with_delta) res.value *= g1 / pr.spot;
    return res;
  }

  double bound = line_bound(model, pr, b);
  if (!std::isfinite(bound)) throw NoFeasibleOffsets("contour offsets leave the strip");
  double scale_log = moment_exists ? moment_log : bound;
  double excess = std::max(0.0, bound - scale_log);
  double prefactor = pr.discount * spot_pow * std::exp(scale_log);

  GridPlan best;
  for (const auto& shear : candidate_shears(pr)) {
    GridPlan plan = plan_grid(model, pr, b, shear, bound, excess, tol);
    if (plan.cost < best.cost) best = std::move(plan);
  }
  if (!std::isfinite(best.cost)) throw NoConvergence("no usable quadrature grid for this term");
  double log_mag = bound - scale_log + best.log_volume;
  if (log_mag < std::log(tol) - 5.0) {
    // negligible term: the integrand bound times the integration volume
    res.error = prefactor * std::exp(log_mag);
    if (with_delta) res.error /= pr.spot;
    return res;
  }
  if (options.fixed_panels > 0) {
    best.cost = n >= 3 ? 0.5 : 1.0;
    for (auto& nodes : best.spec.nodes) {
      nodes = std::max(16, options.fixed_panels + options.fixed_panels % 2);
      best.cost *= nodes + 1.0;
    }
  }
  if (best.cost > double(options.max_evaluations)) {
    std::ostringstream msg;
    msg << "grid needs " << best.cost << " evaluations, budget is " << options.max_evaluations;
    throw NoConvergence(msg.str());
  }

  QuadratureOptions qopt;
  qopt.tol = options.fixed_panels > 0 ? kInf : tol;
  qopt.max_evaluations = options.max_evaluations;
  qopt.max_nodes_per_axis = 1 << 23;
  qopt.hermitian = n >= 3;
  QuadratureResult q = model.visit_psi([&](const auto& psi) {
    EngineIntegrand integrand(psi, pr, best.shear, scale_log, with_delta);
    return integrate_lines(integrand, best.spec, qopt);
  });
  if (!q.converged) {
    std::ostringstream msg;
    msg << "quadrature stopped at error " << q.error_estimate << " > tol " << tol;
    throw NoConvergence(msg.str());
  }
  int sign = 1;
  for (int i = 0; i < n; ++i) sign *= pr.w[i];
  // (2 pi i)^-N with the 2 pi already inside the integrand
  cplx i_pow = std::pow(cplx{0.0, -1.0}, n);
  double scale = with_delta ? 1.0 / pr.spot : 1.0;
  cplx assembled = prefactor * scale * static_cast<double>(sign) * i_pow * q.value;
  if (std::abs(assembled.imag()) > 1e-8 * (1.0 + std::abs(assembled.real()))) {
    std::ostringstream msg;
    msg << "imaginary residue " << assembled.imag() << " for value " << assembled.real();
    throw ImaginaryResidue(msg.str());
  }
  res.value = assembled.real();
  res.error = prefactor * q.error_estimate * scale;
  res.evaluations = q.evaluations;
  return res;
}

double default_tol(int n, const PricingOptions& options) {
  if (options.tol > 0.0) return options.tol;
  return n <= 1 ? 1e-8 : 1e-6;
}

// Natural orientation of every axis: b_n = -w_n omega_n.
Eigen::VectorXd natural_sigma(const Problem& pr) { return -pr.w.cast<double>(); }

struct Plan {
  std::vector<bool> flipped;  // axes rewritten as 1 - complement
  double score = kInf;
};

// Enumerates the subsets S of the flipped axes; returns (sign, reduced problem).
std::vector<std::pair<int, Problem>> expand(const Problem& pr, const std::vector<bool>& flipped) {
  std::vector<int> f_axes;
  for (int i = 0; i < pr.n(); ++i) {
    if (flipped[i]) f_axes.push_back(i);
  }
  std::vector<std::pair<int, Problem>> terms;
  const int nf = static_cast<int>(f_axes.size());
  for (int mask = 0; mask < (1 << nf); ++mask) {
    std::vector<bool> negate(pr.n(), false);
    std::vector<int> keep;
    int sign = 1;
    for (int i = 0; i < pr.n(); ++i) {
      auto it = std::find(f_axes.begin(), f_axes.end(), i);
      if (it == f_axes.end()) {
        keep.push_back(i);
        continue;
      }
      if (mask & (1 << (it - f_axes.begin()))) {
        keep.push_back(i);
        negate[i] = true;
        sign = -sign;
      }
    }
    terms.emplace_back(sign, reduce(pr, keep, negate));
  }
  return terms;
}

bool term_feasible(const LevyModel& model, const Problem& pr) {
  if (pr.n() == 0) {
    for (int j = 0; j < pr.m(); ++j) {
      if (!model.strip().contains(-pr.g[j])) return false;
    }
    return true;
  }
  return !scalar_interval(model, pr, natural_sigma(pr)).empty();
}

PriceResult price_impl(const LevyModel& model, const MonitoringSchedule& sched,
                       const PayoffParameterSet& p, double spot,
                       const std::optional<ContourOffsets>& offsets, const PricingOptions& options,
                       bool with_delta) {
  validate_schedule(sched);
  validate_payoff(p, sched.size());
  if (!(spot > 0.0) || !std::isfinite(spot)) throw InvalidPayoff("spot must be positive");
  if (p.n() > 4) {
    throw DimensionTooLarge("at most 4 exercise conditions are supported, got " +
                            std::to_string(p.n()));
  }
  if (p.m() > 64) throw DimensionTooLarge("at most 64 monitoring dates are supported");
  Problem pr = make_problem(model, sched, p, spot);
  const double tol = default_tol(pr.n(), options);

  PriceResult out;
  out.n = pr.n();
  out.m = pr.m();
  auto finish = [&](const std::vector<std::pair<int, Problem>>& terms,
                    const std::vector<Eigen::VectorXd>& term_offsets) {
    CompensatedSum<double> value;
    double err = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      TermResult r =
          price_term(model, terms[i].second, term_offsets[i], tol, options, with_delta);
      value.add(terms[i].first * r.value);
      err += r.error;
      out.evaluations += r.evaluations;
    }
    out.value = value.value();
    out.quadrature_error = err;
  };

  if (offsets) {
    if (offsets->omega.size() != pr.n() || (offsets->omega.array() <= 0.0).any()) {
      throw NoFeasibleOffsets("offsets must be N positive numbers");
    }
    if (!offsets_feasible(model, p, *offsets)) {
      throw NoFeasibleOffsets("supplied offsets put a leg outside the strip");
    }
    Eigen::VectorXd b = -(pr.w.cast<double>().array() * offsets->omega.array()).matrix();
    out.offsets_used = *offsets;
    finish({{1, pr}}, {b});
    return out;
  }

  // choose which axes to complement by comparing the optimised bounds
  Plan best;
  Eigen::VectorXd best_b;
  const int n = pr.n();
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (mask != 0 && !options.allow_complements) break;
    std::vector<bool> flipped(n);
    Eigen::VectorXd sigma = natural_sigma(pr);
    for (int i = 0; i < n; ++i) {
      flipped[i] = (mask >> i) & 1;
      if (flipped[i]) sigma[i] = -sigma[i];
    }
    auto b = optimize_offsets(model, pr, sigma);
    if (!b) continue;
    double score = line_bound(model, pr, *b) + kComplementPenalty * std::popcount(unsigned(mask));
    if (!(score < best.score)) continue;
    bool ok = true;
    if (mask != 0) {
      for (const auto& [sign, term] : expand(pr, flipped)) ok = ok && term_feasible(model, term);
    }
    if (!ok) continue;
    best = {flipped, score};
    best_b = *b;
  }
  if (!std::isfinite(best.score)) {
    Interval iv = scalar_interval(model, pr, natural_sigma(pr));
    throw NoFeasibleOffsets("no contour fits the strip (violated leg " +
                            std::to_string(iv.limiting_leg + 1) + ")");
  }
  auto terms = expand(pr, best.flipped);
  std::vector<Eigen::VectorXd> term_offsets;
  for (const auto& [sign, term] : terms) {
    if (term.n() == pr.n()) {
      term_offsets.push_back(best_b);  // the complemented full term is the searched orthant
    } else if (term.n() == 0) {
      term_offsets.emplace_back();
    } else {
      auto b = optimize_offsets(model, term, natural_sigma(term));
      if (!b) throw NoFeasibleOffsets("complement term has no feasible contour");
      term_offsets.push_back(*b);
    }
  }
  out.offsets_used.omega = best_b.cwiseAbs();
  finish(terms, term_offsets);
  return out;
}

}  // namespace

void validate_schedule(const MonitoringSchedule& sched) {
  if (sched.dates.empty()) throw InvalidSchedule("at least one monitoring date is required");
  double prev = sched.t;
  for (std::size_t j = 0; j < sched.dates.size(); ++j) {
    if (!(sched.dates[j] > prev) || !std::isfinite(sched.dates[j])) {
      throw InvalidSchedule("monitoring dates must strictly increase after t (date " +
                            std::to_string(j + 1) + ")");
    }
    prev = sched.dates[j];
  }
}

void validate_payoff(const PayoffParameterSet& p, int m) {
  if (p.m() != m || p.gamma.size() != m) {
    throw InvalidPayoff("gamma and the columns of a must match the number of dates");
  }
  if (p.n() < 1) throw InvalidPayoff("at least one exercise condition is required");
  if (p.k_log.size() != p.n() || p.w.size() != p.n()) {
    throw InvalidPayoff("k_log and w must have one entry per exercise condition");
  }
  for (int i = 0; i < p.n(); ++i) {
    if (p.w[i] != 1 && p.w[i] != -1) throw InvalidPayoff("w entries must be +1 or -1");
    if (p.a.row(i).isZero(0.0)) throw InvalidPayoff("row " + std::to_string(i + 1) + " of a is zero");
    if (!std::isfinite(p.k_log[i])) throw InvalidPayoff("k_log must be finite");
  }
  if (!p.a.allFinite() || !p.gamma.allFinite()) throw InvalidPayoff("non-finite payoff parameters");
}

cplx psi_aggregate(const LevyModel& model, const MonitoringSchedule& sched,
                   const PayoffParameterSet& p, std::span<const cplx> xi) {
  validate_schedule(sched);
  validate_payoff(p, sched.size());
  if (static_cast<int>(xi.size()) != p.n()) throw InvalidPayoff("xi must have N entries");
  cplx total = 0.0;
  const int m = p.m();
  for (int j = 0; j < m; ++j) {
    cplx zeta = 0.0;
    for (int k = j; k < m; ++k) {
      zeta -= kI * p.gamma[k];
      for (int i = 0; i < p.n(); ++i) zeta += p.a(i, k) * xi[i];
    }
    double tau = sched.dates[j] - (j == 0 ? sched.t : sched.dates[j - 1]);
    try {
      total += tau * model.psi(zeta);
    } catch (const StripViolation& e) {
      throw StripViolation("leg " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return total;
}

bool offsets_feasible(const LevyModel& model, const PayoffParameterSet& p,
                      const ContourOffsets& offsets) {
  if (offsets.omega.size() != p.n() || (offsets.omega.array() <= 0.0).any()) return false;
  const int m = p.m();
  double suffix = 0.0;
  for (int k = m - 1; k >= 0; --k) {
    for (int i = 0; i < p.n(); ++i) suffix += p.w[i] * offsets.omega[i] * p.a(i, k);
    suffix += p.gamma[k];
    // condition: suffix in ]-lambda_plus, -lambda_minus[
    if (!model.strip().contains(-suffix)) return false;
  }
  return true;
}

ContourOffsets default_offsets(const LevyModel& model, const PayoffParameterSet& p) {
  validate_payoff(p, p.m());
  MonitoringSchedule dummy{0.0, {}};
  for (int j = 0; j < p.m(); ++j) dummy.dates.push_back(j + 1.0);
  Problem pr = make_problem(model, dummy, p, 1.0);
  Interval iv = scalar_interval(model, pr, natural_sigma(pr));
  if (iv.empty()) {
    throw NoFeasibleOffsets("strip too narrow for this payoff (violated leg " +
                            std::to_string(iv.limiting_leg + 1) + ")");
  }
  double s = std::isfinite(iv.hi) ? 0.5 * (iv.lo + iv.hi) : std::max(2.0 * iv.lo, iv.lo + 1.0);
  ContourOffsets out{Eigen::VectorXd::Constant(p.n(), s)};
  for (int shrink = 0; shrink < 60 && !offsets_feasible(model, p, out); ++shrink) {
    s = iv.lo + 0.5 * (s - iv.lo);
    out.omega.setConstant(s);
  }
  if (!offsets_feasible(model, p, out)) throw NoFeasibleOffsets("midpoint offsets fail the check");
  return out;
}

PriceResult price_digital(const LevyModel& model, const MonitoringSchedule& sched,
                          const PayoffParameterSet& p, double spot,
                          const std::optional<ContourOffsets>& offsets,
                          const PricingOptions& options) {
  return price_impl(model, sched, p, spot, offsets, options, false);
}

double delta(const LevyModel& model, const MonitoringSchedule& sched, const PayoffParameterSet& p,
             double spot, const PricingOptions& options) {
  return price_impl(model, sched, p, spot, std::nullopt, options, true).value;
}

PriceResult price_single_period(const LevyModel& model, double t, double expiry, double gamma,
                                double a, int w, double k_log, double spot, double tol) {
  if (!(expiry > t)) throw InvalidSchedule("expiry must be after t");
  if (a == 0.0) throw InvalidPayoff("a must be nonzero");
  if (w != 1 && w != -1) throw InvalidPayoff("w must be +1 or -1");
  if (!(spot > 0.0)) throw InvalidPayoff("spot must be positive");
  const double tau = expiry - t;
  const double d = a * std::log(spot) - k_log;
  const Strip& strip = model.strip();

  // Im(a xi - i gamma) = -a w omega - gamma must stay inside the strip
  double lo = 0.0, hi = kInf;
  double k = -a * w;
  double e1 = (strip.lambda_minus + gamma) / k, e2 = (strip.lambda_plus + gamma) / k;
  lo = std::max(lo, std::min(e1, e2));
  hi = std::min(hi, std::max(e1, e2));
  if (!(lo < hi)) throw NoFeasibleOffsets("no omega satisfies the single-period strip condition");
  auto log_bound = [&](double omega) {
    double b = -w * omega;
    double y = a * b - gamma;
    return -b * d - tau * model.psi_unchecked(cplx{0.0, y}).real() - std::log(omega) -
           std::log(y - strip.lambda_minus) - std::log(strip.lambda_plus - y);
  };
  double pad = 1e-9 * (hi - lo);
  double omega = minimize_unimodal(log_bound, lo + pad, hi - pad, 1e-10 * (1.0 + hi));
  double b = -w * omega;

  double scale_log = strip.contains(-gamma) ? -tau * model.psi_unchecked(cplx{0.0, -gamma}).real()
                                            : log_bound(omega);
  double trunc = truncation_radius(model.decay_constant(), model.order(),
                                   tau * std::pow(std::abs(a), model.order()), 1e-3 * tol);
  auto f = [&](cplx xi) {
    return std::exp(kI * xi * d - tau * model.psi_unchecked(a * xi - kI * gamma) - scale_log) /
           (kTwoPi * xi);
  };
  QuadratureResult q = integrate_line(f, b, trunc, tol, 1 << 20);
  if (!q.converged) throw NoConvergence("single-period quadrature did not converge");
  double prefactor = std::exp(-model.rate() * tau) * std::pow(spot, gamma) * std::exp(scale_log);
  cplx v = prefactor * static_cast<double>(w) * cplx{0.0, -1.0} * q.value;
  if (std::abs(v.imag()) > 1e-8 * (1.0 + std::abs(v.real()))) {
    throw ImaginaryResidue("single-period imaginary residue " + std::to_string(v.imag()));
  }
  PriceResult out;
  out.value = v.real();
  out.quadrature_error = prefactor * q.error_estimate;
  out.offsets_used.omega = Eigen::VectorXd::Constant(1, omega);
  out.n = out.m = 1;
  out.evaluations = q.evaluations;
  return out;
}

}  // namespace levyx
