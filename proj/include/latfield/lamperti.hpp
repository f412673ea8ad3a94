#pragma once

#include <span>
#include <vector>

#include "latfield/lattice.hpp"
#include "latfield/stats.hpp"

namespace latfield {

/// |<t, Theta>| above this is rejected; e^710 overflows a double.
inline constexpr double kExponentGuard = 700.0;

/// Values of a Theta-self-similar field: the entry stored at t is Y_{e^t}.
struct SelfSimilarField {
  LatticeField inner;
  ThetaVector theta;
};

/// Per-axis tables of e^{theta_l * t_l} over a window, computed as integer powers of
/// e^{theta_l}. Integer-log rates (theta_l = ln 2, ...) therefore give exact multipliers.
class ExponentialWeights {
 public:
  /// sign = +1 gives e^{<t,Theta>}, sign = -1 gives e^{-<t,Theta>}.
  ExponentialWeights(const ThetaVector& theta, const Window& window, int sign);

  double operator()(const MultiIndex& t) const noexcept;

 private:
  Window window_;
  std::vector<std::vector<double>> axis_;
};

/// (L_Theta X)_{e^t} = e^{<t,Theta>} X_t.
SelfSimilarField lamperti_forward(const LatticeField& x, const ThetaVector& theta);

/// (L_Theta^{-1} Y)_t = e^{-<t,Theta>} Y_{e^t}.
LatticeField lamperti_inverse(const SelfSimilarField& y);

/// Monte Carlo check of Y_{e^{t+s}} =law e^{<s,Theta>} Y_{e^t}: per-point mean and
/// second moment of the shifted replicates against the scaled ones, paired across
/// replicates. Needs >= 100 replicates on a common window.
TestReport selfsimilar_scaling_check(std::span<const SelfSimilarField> samples, const MultiIndex& s,
                                     double threshold_z = kDefaultThresholdZ);

}  // namespace latfield
