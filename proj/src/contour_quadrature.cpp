#include "levyx/contour_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyx/errors.hpp"

namespace levyx {

namespace {

constexpr std::size_t kLinesPerChunk = 64;

struct AxisGrid {
  std::vector<cplx> nodes;
  std::vector<double> fine;  // trapezoid weights, step h
  std::vector<double> sub;   // trapezoid weights of the even-index subgrid, step 2h
};

AxisGrid make_axis(double b, double L, int panels) {
  AxisGrid g;
  double h = 2.0 * L / panels;
  g.nodes.resize(panels + 1);
  g.fine.assign(panels + 1, h);
  g.sub.assign(panels + 1, 0.0);
  for (int k = 0; k <= panels; ++k) {
    // symmetric about zero by construction: k and panels - k are mirror images
    double x = (k - panels / 2) * h;
    g.nodes[k] = {x, b};
    if (k % 2 == 0) g.sub[k] = 2.0 * h;
  }
  g.fine.front() = g.fine.back() = 0.5 * h;
  g.sub.front() = g.sub.back() = h;
  return g;
}

struct Sums {
  cplx fine{}, sub{};
};

void validate_spec(const ContourSpec& spec) {
  std::size_t n = spec.offsets.size();
  if (n == 0 || spec.truncation.size() != n || spec.nodes.size() != n) {
    throw InvalidContour("contour spec axes are inconsistent or empty");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.offsets[i] == 0.0 || !std::isfinite(spec.offsets[i])) {
      throw InvalidContour("offset on axis " + std::to_string(i) + " must be finite and nonzero");
    }
    if (!(spec.truncation[i] > 0.0) || !std::isfinite(spec.truncation[i])) {
      throw InvalidContour("truncation on axis " + std::to_string(i) + " must be positive");
    }
    if (spec.nodes[i] < 16 || spec.nodes[i] % 2 != 0) {
      throw InvalidContour("node count on axis " + std::to_string(i) + " must be even and >= 16");
    }
  }
}

}  // namespace

double truncation_radius(double decay_c, double order, double tau, double tol) {
  if (!(decay_c > 0.0) || !(order > 0.0) || !(tau > 0.0) || !(tol > 0.0)) {
    throw NonPositiveInput("truncation_radius needs positive decay, order, tau and tol");
  }
  if (order > 2.0) throw NonPositiveInput("order must lie in ]0, 2]");
  constexpr double lo_clamp = 1.0, hi_clamp = 1e4;
  if (tol >= 1.0) return lo_clamp;  // any line segment meets a unit tolerance
  // g(L) = c tau L^order - ln(1+L) + ln(tol) is increasing past its minimum;
  // we want the smallest L with g(L) >= 0.
  auto g = [&](double L) { return decay_c * tau * std::pow(L, order) - std::log1p(L) + std::log(tol); };
  if (g(lo_clamp) >= 0.0) return lo_clamp;
  if (g(hi_clamp) < 0.0) return hi_clamp;
  double lo = lo_clamp, hi = hi_clamp;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

QuadratureResult integrate_lines(LineIntegrand& f, const ContourSpec& spec,
                                 const QuadratureOptions& options) {
  validate_spec(spec);
  const std::size_t n_axes = spec.offsets.size();
  const bool half = options.hermitian && n_axes >= 2;

  QuadratureResult result;
  result.truncation_used = spec.truncation;
  for (int level = 0;; ++level) {
    std::vector<int> panels(n_axes);
    std::int64_t evals = 1;
    bool over_axis_cap = false;
    for (std::size_t a = 0; a < n_axes; ++a) {
      panels[a] = spec.nodes[a] << level;
      over_axis_cap |= panels[a] > options.max_nodes_per_axis;
      evals *= panels[a] + 1;
    }
    if (half) evals = evals / (panels.back() + 1) * (panels.back() / 2 + 1);
    if (level > 0 && (over_axis_cap || result.evaluations + evals > options.max_evaluations)) {
      return result;
    }

    std::vector<AxisGrid> grids;
    std::vector<std::vector<cplx>> nodes;
    for (std::size_t a = 0; a < n_axes; ++a) {
      grids.push_back(make_axis(spec.offsets[a], spec.truncation[a], panels[a]));
      nodes.push_back(grids.back().nodes);
    }
    f.set_grid(nodes);

    // Lines are indexed by the outer multi-index with axis 1 fastest.
    std::vector<int> outer_lo(n_axes - 1, 0), outer_count(n_axes - 1);
    std::size_t n_lines = 1;
    for (std::size_t a = 1; a < n_axes; ++a) {
      outer_count[a - 1] = panels[a] + 1;
      if (half && a == n_axes - 1) {
        outer_lo[a - 1] = panels[a] / 2;
        outer_count[a - 1] = panels[a] / 2 + 1;
      }
      n_lines *= outer_count[a - 1];
    }
    const int center = half ? panels.back() / 2 : -1;
    const std::size_t n_chunks = (n_lines + kLinesPerChunk - 1) / kLinesPerChunk;
    std::vector<Sums> chunk_center(n_chunks), chunk_rest(n_chunks);

    parallel_for(n_chunks, [&](std::size_t chunk) {
      std::vector<cplx> out(panels[0] + 1);
      std::vector<int> outer(n_axes - 1);
      CompensatedSum<cplx> c_fine, c_sub, r_fine, r_sub;
      std::size_t end = std::min(n_lines, (chunk + 1) * kLinesPerChunk);
      for (std::size_t line = chunk * kLinesPerChunk; line < end; ++line) {
        std::size_t rem = line;
        double w_fine = 1.0, w_sub = 1.0;
        for (std::size_t a = 1; a < n_axes; ++a) {
          int k = outer_lo[a - 1] + static_cast<int>(rem % outer_count[a - 1]);
          rem /= outer_count[a - 1];
          outer[a - 1] = k;
          w_fine *= grids[a].fine[k];
          w_sub *= grids[a].sub[k];
        }
        f.eval_line(outer, out);
        CompensatedSum<cplx> l_fine, l_sub;
        const auto& g0 = grids[0];
        for (int k = 0; k <= panels[0]; ++k) {
          l_fine.add(g0.fine[k] * out[k]);
          if (k % 2 == 0) l_sub.add(g0.sub[k] * out[k]);
        }
        bool is_center = n_axes >= 2 && outer.back() == center;
        (is_center ? c_fine : r_fine).add(w_fine * l_fine.value());
        if (w_sub != 0.0) (is_center ? c_sub : r_sub).add(w_sub * l_sub.value());
      }
      chunk_center[chunk] = {c_fine.value(), c_sub.value()};
      chunk_rest[chunk] = {r_fine.value(), r_sub.value()};
    });

    CompensatedSum<cplx> c_fine, c_sub, r_fine, r_sub;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      c_fine.add(chunk_center[c].fine);
      c_sub.add(chunk_center[c].sub);
      r_fine.add(chunk_rest[c].fine);
      r_sub.add(chunk_rest[c].sub);
    }
    auto assemble = [&](cplx centre, cplx rest) {
      if (!half) return centre + rest;
      // mirror half: sum over k < center equals (-1)^N conj(rest)
      cplx mirrored = (n_axes % 2 == 0) ? std::conj(rest) : -std::conj(rest);
      return centre + rest + mirrored;
    };
    cplx fine = assemble(c_fine.value(), r_fine.value());
    cplx sub = assemble(c_sub.value(), r_sub.value());
    if (!std::isfinite(fine.real()) || !std::isfinite(fine.imag()) || !std::isfinite(sub.real()) ||
        !std::isfinite(sub.imag())) {
      throw NaNEncountered("integrand returned a non-finite value at refinement level " +
                           std::to_string(level));
    }
    result.value = fine;
    result.error_estimate = std::abs(fine - sub);
    result.evaluations += evals;
    result.nodes_used = panels;
    if (result.error_estimate <= options.tol) {
      result.converged = true;
      return result;
    }
  }
}

namespace {

class FunctionIntegrand final : public LineIntegrand {
 public:
  explicit FunctionIntegrand(const std::function<cplx(std::span<const cplx>)>& f) : f_(f) {}

  void set_grid(const std::vector<std::vector<cplx>>& nodes) override { nodes_ = &nodes; }

  void eval_line(std::span<const int> outer, std::span<cplx> out) const override {
    const auto& nodes = *nodes_;
    std::vector<cplx> xi(nodes.size());
    for (std::size_t a = 1; a < nodes.size(); ++a) xi[a] = nodes[a][outer[a - 1]];
    for (std::size_t k = 0; k < out.size(); ++k) {
      xi[0] = nodes[0][k];
      out[k] = f_(xi);
    }
  }

 private:
  const std::function<cplx(std::span<const cplx>)>& f_;
  const std::vector<std::vector<cplx>>* nodes_ = nullptr;
};

}  // namespace

QuadratureResult integrate_line(const std::function<cplx(cplx)>& f, double b, double L, double tol,
                                int max_nodes) {
  std::function<cplx(std::span<const cplx>)> g = [&](std::span<const cplx> xi) { return f(xi[0]); };
  ContourSpec spec{{b}, {L}, {16}};
  QuadratureOptions options;
  options.tol = tol;
  options.max_nodes_per_axis = max_nodes;
  FunctionIntegrand integrand(g);
  return integrate_lines(integrand, spec, options);
}

QuadratureResult integrate_tensor(const std::function<cplx(std::span<const cplx>)>& f,
                                  const ContourSpec& spec, double tol, int max_nodes_per_axis) {
  if (spec.offsets.size() > 4) {
    throw DimensionTooLarge("tensor quadrature supports at most 4 axes, got " +
                            std::to_string(spec.offsets.size()));
  }
  QuadratureOptions options;
  options.tol = tol;
  options.max_nodes_per_axis = max_nodes_per_axis;
  FunctionIntegrand integrand(f);
  return integrate_lines(integrand, spec, options);
}

}  // namespace levyx
