#include "latfield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latfield/operators.hpp"

namespace latfield {

double series_tail_bound(const ThetaVector& theta, int depth, double max_abs_increment) {
  double geometric = 1.0;
  for (int l = 0; l < theta.size(); ++l) geometric /= -std::expm1(-theta[l]);
  return max_abs_increment * theta.size() * geometric * std::exp(-(depth + 1.0) * theta.min_theta());
}

int default_depth(const ThetaVector& theta, double rel_tol) {
  int m = 1;
  while (series_tail_bound(theta, m, 1.0) > rel_tol) ++m;
  return m;
}

Window series_source_window(const Window& window, int depth) {
  const MultiIndex reach = MultiIndex::filled(window.dim(), depth + 1);
  return Window(window.origin - reach, window.extents + reach);
}

namespace {

struct LagKernel {
  std::vector<std::vector<double>> decay;  // decay[l][j] = e^{-j theta_l}
  std::vector<int> order;
  int depth;
};

double lag_sum(const LatticeField& inc, const MultiIndex& t, const LagKernel& kernel, int level, MultiIndex& p,
               double weight) {
  const int axis = kernel.order[static_cast<std::size_t>(level)];
  const auto& decay = kernel.decay[static_cast<std::size_t>(axis)];
  const bool innermost = level + 1 == static_cast<int>(kernel.order.size());
  CompensatedSum acc;
  for (int j = 0; j <= kernel.depth; ++j) {
    p[axis] = t[axis] - j;
    const double w = weight * decay[static_cast<std::size_t>(j)];
    acc += innermost ? w * inc(p) : lag_sum(inc, t, kernel, level + 1, p, w);
  }
  return acc.value();
}

}  // namespace

SeriesSolution series_solve(const NoiseField& g, const Window& window, int depth, std::span<const int> axis_order) {
  const int n = window.dim();
  require_same_dim(g.inner.dim(), n, "noise vs solution window");
  if (depth <= 0) throw LatticeError(ErrorKind::NonPositiveDepth, "depth must be positive, got " + std::to_string(depth));
  const Window source = series_source_window(window, depth);
  if (!g.inner.window().contains(source)) {
    throw LatticeError(ErrorKind::SourceWindowTooSmall, "series on " + window.to_string() + " at depth " +
                                                            std::to_string(depth) + " needs G on " + source.to_string() +
                                                            ", have " + g.inner.window().to_string());
  }
  const LatticeField inc = increment_field(restrict_to(g.inner, source)).inner;

  LagKernel kernel;
  kernel.depth = depth;
  kernel.decay.resize(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    const double q = std::exp(-g.theta[l]);
    auto& d = kernel.decay[static_cast<std::size_t>(l)];
    d.resize(static_cast<std::size_t>(depth) + 1);
    for (int j = 0; j <= depth; ++j) d[static_cast<std::size_t>(j)] = std::pow(q, j);
  }
  if (axis_order.empty()) {
    kernel.order.resize(static_cast<std::size_t>(n));
    std::iota(kernel.order.begin(), kernel.order.end(), 0);
  } else {
    kernel.order.assign(axis_order.begin(), axis_order.end());
    std::vector<int> check = kernel.order;
    std::sort(check.begin(), check.end());
    for (int l = 0; l < n; ++l) {
      if (static_cast<int>(check.size()) != n || check[static_cast<std::size_t>(l)] != l) {
        throw LatticeError(ErrorKind::InvalidArgument, "axis order is not a permutation");
      }
    }
  }

  LatticeField x = LatticeField::generate(window, [&](const MultiIndex& t) {
    MultiIndex p = t;
    return lag_sum(inc, t, kernel, 0, p, 1.0);
  });
  return SeriesSolution{std::move(x), depth, series_tail_bound(g.theta, depth, inc.max_abs())};
}

double recursion_residual(const LatticeField& x, const NoiseField& g) {
  const int n = x.dim();
  require_same_dim(g.inner.dim(), n, "solution vs noise");
  const ThetaStencil stencil(g.theta);
  const auto& corners = corner_signs(n);
  const MultiIndex one = MultiIndex::filled(n, 1);
  double worst = 0.0;
  std::size_t points = 0;
  for_each_point(x.window(), [&](const MultiIndex& t) {
    const MultiIndex low = t - one;
    if (!x.contains(low) || !g.inner.contains(t) || !g.inner.contains(low)) return;
    ++points;
    CompensatedSum delta;
    for (const auto& c : corners) delta += c.sign * g.inner(t - c.offset);
    CompensatedSum r;
    r += x(t);
    r += -stencil.apply(x, t);
    r += -delta.value();
    worst = std::max(worst, std::fabs(r.value()));
  });
  if (points == 0) {
    throw LatticeError(ErrorKind::NoOverlap, "no interior point shared by " + x.window().to_string() + " and " +
                                                 g.inner.window().to_string());
  }
  return worst;
}

InitialDecayReport vanishing_initial_check(const LatticeField& x, const ThetaVector& theta, int axis,
                                           const MultiIndex& base, std::span<const std::int64_t> probes,
                                           double rel_threshold) {
  require_same_dim(x.dim(), theta.size(), "field vs theta");
  require_same_dim(x.dim(), base.size(), "field vs base point");
  if (axis < 0 || axis >= x.dim()) {
    throw LatticeError(ErrorKind::InvalidArgument, "axis " + std::to_string(axis + 1) + " out of range");
  }
  if (probes.empty()) throw LatticeError(ErrorKind::InvalidArgument, "no probes given");
  InitialDecayReport rep;
  rep.axis = axis;
  rep.base = base;
  rep.probes.assign(probes.begin(), probes.end());
  std::sort(rep.probes.begin(), rep.probes.end(), std::greater<>());
  for (std::int64_t m : rep.probes) {
    MultiIndex p = base;
    p[axis] = m;
    const double v = x.get(p);
    rep.values.push_back(std::exp(static_cast<double>(m) * theta[axis]) * std::fabs(v));
  }
  rep.threshold = rel_threshold * std::max(1.0, rep.values.front());
  rep.pass = rep.values.back() <= rep.threshold;
  return rep;
}

}  // namespace latfield
