#pragma once

#include <span>
#include <vector>

#include "latfield/lattice.hpp"
#include "latfield/noise.hpp"

namespace latfield {

/// Stationary solution of X_t = <Theta-hat, X-hat_t^-> + Delta_t G, truncated to lags
/// in [0, depth]^N.
struct SeriesSolution {
  LatticeField field;
  int truncation_depth = 0;
  /// prefactor * e^{-depth * min theta}; bounds the neglected lags given the largest
  /// increment seen on the source window.
  double tail_bound = 0.0;
};

/// A-priori bound on the neglected part of the lag series:
///   max|dG| * N * e^{-(depth+1) min theta} * prod_l 1 / (1 - e^{-theta_l}).
double series_tail_bound(const ThetaVector& theta, int depth, double max_abs_increment);

/// Smallest depth whose tail bound is at most rel_tol * max|dG|.
int default_depth(const ThetaVector& theta, double rel_tol = 1e-10);

/// Window of G needed by series_solve: `window` extended by depth + 1 on the low side.
Window series_source_window(const Window& window, int depth);

/// X_t = sum_{j in [0,depth]^N} e^{-<j,Theta>} Delta_{t-j} G for t in `window`.
/// The lag sums are nested in `axis_order` (outermost first; default natural order).
SeriesSolution series_solve(const NoiseField& g, const Window& window, int depth,
                            std::span<const int> axis_order = {});

/// max over interior t of |X_t - <Theta-hat, X-hat_t^-> - Delta_t G|.
double recursion_residual(const LatticeField& x, const NoiseField& g);

struct InitialDecayReport {
  int axis = 0;
  MultiIndex base;
  std::vector<std::int64_t> probes;
  std::vector<double> values;  // e^{m theta_axis} |X| with coordinate `axis` set to m
  double threshold = 0.0;
  bool pass = true;
};

/// Samples e^{m theta_j} |X| along axis j through `base` at the given probes (sorted
/// towards -infinity internally). Passes when the value at the most negative probe is
/// at most rel_threshold * max(1, value at the least negative probe).
InitialDecayReport vanishing_initial_check(const LatticeField& x, const ThetaVector& theta, int axis,
                                           const MultiIndex& base, std::span<const std::int64_t> probes,
                                           double rel_threshold = 1e-6);

}  // namespace latfield
