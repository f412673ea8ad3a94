#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latfield/lattice.hpp"

namespace latfield {

inline constexpr double kDefaultThresholdZ = 5.0;
inline constexpr std::size_t kMinReplicates = 100;

/// Independent replicates sharing one window.
struct Ensemble {
  std::vector<LatticeField> replicates;
  std::uint64_t seed = 0;
  std::string generator_tag;

  /// Throws InvalidArgument unless there are >= 2 replicates on a common window.
  void validate() const;
  const Window& window() const { return replicates.front().window(); }
  std::size_t size() const noexcept { return replicates.size(); }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // n - 1 denominator
  double std_error = 0.0;
};

Moments empirical_moments(const Ensemble& e, const MultiIndex& t);

struct ComparisonDetail {
  std::string statistic;  // "mean", "product", "second_moment", ...
  MultiIndex point;
  MultiIndex shift;
  MultiIndex lag;
  double z = 0.0;
};

struct TestReport {
  std::string statistic_name;
  double max_abs_z = 0.0;
  double threshold = kDefaultThresholdZ;
  bool pass = true;
  std::vector<ComparisonDetail> details;

  /// Keeps pass consistent with max_abs_z <= threshold.
  void add(ComparisonDetail d);
};

/// Paired z statistic for the per-replicate differences d_r: mean(d) / (sd(d)/sqrt(R)).
/// Zero differences give exactly 0; a nonzero constant difference gives +-infinity.
double paired_z(std::span<const double> differences);

/// Unit vectors and the all-ones vector.
std::vector<MultiIndex> default_shifts(int n);
/// Zero lag (second moment) plus the unit vectors.
std::vector<MultiIndex> default_lags(int n);

/// Compares E[X_t] and E[X_t X_{t+lag}] with their counterparts at t + s for every
/// admissible t, each shift s and each lag, via paired z statistics across replicates.
TestReport shift_invariance_test(const Ensemble& e, std::span<const MultiIndex> shifts,
                                 std::span<const MultiIndex> lags, double threshold_z = kDefaultThresholdZ);

/// shift_invariance_test applied to the increment fields of the replicates.
TestReport increment_stationarity_test(const Ensemble& e, std::span<const MultiIndex> shifts,
                                       std::span<const MultiIndex> lags,
                                       double threshold_z = kDefaultThresholdZ);

}  // namespace latfield
