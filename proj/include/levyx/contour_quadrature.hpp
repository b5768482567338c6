#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "levyx/numerics.hpp"

namespace levyx {

/// Integration lines Im(xi_n) = offsets[n], truncated to |Re xi_n| <= truncation[n]
/// and split into nodes[n] trapezoid panels (even, >= 16) at the first level.
struct ContourSpec {
  std::vector<double> offsets;
  std::vector<double> truncation;
  std::vector<int> nodes;
};

struct QuadratureResult {
  cplx value{};
  /// |finest - next finest|, where the next finest grid is the even-index subgrid.
  double error_estimate = 0.0;
  std::int64_t evaluations = 0;
  std::vector<double> truncation_used;
  std::vector<int> nodes_used;
  bool converged = false;
};

struct QuadratureOptions {
  double tol = 1e-8;
  std::int64_t max_evaluations = std::int64_t{1} << 28;
  int max_nodes_per_axis = 1 << 16;
  /// The integrand satisfies f(-conj(xi)) = (-1)^N conj(f(xi)); only half the
  /// grid is evaluated.
  bool hermitian = false;
};

/// Smallest L >= 1 (capped at 1e4) with exp(-c tau L^order) <= tol / (1 + L).
double truncation_radius(double decay_c, double order, double tau, double tol);

/// Integrand evaluated one axis-0 line at a time. set_grid is called once per
/// refinement level; eval_line must be thread-safe.
class LineIntegrand {
 public:
  virtual ~LineIntegrand() = default;
  /// nodes[n][k] is the complex abscissa of node k on axis n.
  virtual void set_grid(const std::vector<std::vector<cplx>>& nodes) = 0;
  /// Fills out[k] = f(nodes[0][k], nodes[1][outer[0]], ..., nodes[N-1][outer[N-2]]).
  virtual void eval_line(std::span<const int> outer, std::span<cplx> out) const = 0;
};

/// Tensor trapezoid with grid doubling until |fine - subgrid| <= tol. Returns
/// converged = false with the best value when the budget runs out. Summation
/// order is fixed, so results do not depend on the thread count.
QuadratureResult integrate_lines(LineIntegrand& f, const ContourSpec& spec,
                                 const QuadratureOptions& options);

/// 1-D trapezoid of f(x + ib) over [-L, L], starting from 16 panels and doubling
/// up to max_nodes.
QuadratureResult integrate_line(const std::function<cplx(cplx)>& f, double b, double L, double tol,
                                int max_nodes = 1 << 14);

/// N-D tensor trapezoid (N <= 4) of f over the lines described by spec.
QuadratureResult integrate_tensor(const std::function<cplx(std::span<const cplx>)>& f,
                                  const ContourSpec& spec, double tol, int max_nodes_per_axis = 1 << 7);

}  // namespace levyx
