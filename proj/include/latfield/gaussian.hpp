#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "latfield/lamperti.hpp"
#include "latfield/lattice.hpp"
#include "latfield/noise.hpp"
#include "latfield/solver.hpp"
#include "latfield/stats.hpp"

namespace latfield {

/// Hurst vector plus the normalisation E X^2(1,...,1) of the fractional Brownian sheet.
struct GaussianSpec {
  std::vector<double> hurst;
  double variance_at_one = 1.0;

  int dim() const noexcept { return static_cast<int>(hurst.size()); }
  /// Throws InvalidArgument unless every H_l is in (0,1) and the variance is positive.
  void validate() const;
};

/// variance_at_one * prod_l (|s_l|^{2H_l} + |t_l|^{2H_l} - |s_l - t_l|^{2H_l}) / 2 on the
/// nonnegative orthant.
double fbs_covariance(const GaussianSpec& spec, std::span<const double> s, std::span<const double> t);

/// Covariance of the sheet's square increments over unit cells c and d, summed over the
/// 2^N x 2^N corner pairs. Depends on c - d only.
double cell_increment_covariance(const GaussianSpec& spec, const MultiIndex& c, const MultiIndex& d);

struct CovarianceMatrix {
  std::vector<std::vector<double>> points;
  Eigen::MatrixXd entries;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

/// Sheet covariance between real coordinate tuples.
CovarianceMatrix sheet_covariance(const GaussianSpec& spec, std::vector<std::vector<double>> points);

/// Increment covariance between all unit cells of `cells`, in row-major order.
CovarianceMatrix increment_covariance(const GaussianSpec& spec, const Window& cells);

/// Cholesky factor of cov + jitter * I with jitter escalating from 0 through
/// 1e-12 ... 1e-6 times trace/dim. Rows with exactly zero variance are kept at 0.
class GaussianSampler {
 public:
  explicit GaussianSampler(const CovarianceMatrix& cov);

  std::size_t dim() const noexcept { return dim_; }
  double jitter() const noexcept { return jitter_; }

  /// Zero-mean draw for (seed, replicate, purpose). Deterministic.
  std::vector<double> draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose = 0) const;
  /// out = L z on strided vectors of length dim(); entries with zero variance become 0.
  void apply(const double* z, std::ptrdiff_t z_stride, double* out, std::ptrdiff_t out_stride) const;

 private:
  std::size_t dim_ = 0;
  double jitter_ = 0.0;
  std::vector<std::size_t> active_;  // indices with positive variance
  std::vector<double> lower_;        // packed row-major lower-triangular factor of the active block
};

/// Covariance of unit-interval fBm increments over cells lo+1, ..., lo+count on one axis.
CovarianceMatrix axis_increment_covariance(double hurst, std::int64_t lo, std::int64_t count);

/// Draws for covariances scale * K_1 (x) ... (x) K_N over the points of a window in
/// row-major order. The Cholesky factor of a Kronecker product is the Kronecker product
/// of the axis factors, so this matches the dense factorisation at O(volume * sum of
/// extents) cost per draw.
class SeparableSampler {
 public:
  SeparableSampler(Window window, const std::vector<CovarianceMatrix>& axis, double scale);

  const Window& window() const noexcept { return window_; }
  std::vector<double> draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose = 0) const;

 private:
  Window window_;
  std::vector<GaussianSampler> axis_;
  double sqrt_scale_;
};

std::vector<std::vector<double>> sample_gaussian(const CovarianceMatrix& cov, std::uint64_t seed,
                                                 std::size_t replicates);

/// Stream purposes, so different generators never share substreams.
enum class StreamPurpose : std::uint32_t { Generic = 0, Noise = 1, SelfSimilar = 2, Sheet = 3 };

/// Draws noise fields on a fixed window: Gaussian square increments with the sheet's
/// increment covariance on every cell the window needs, then integrate_increments with
/// the zero-plane boundary. The increment covariance is separable, so the draw uses
/// SeparableSampler.
class NoiseGenerator {
 public:
  NoiseGenerator(GaussianSpec spec, ThetaVector theta, Window window);

  const Window& window() const noexcept { return window_; }
  /// Empty when the window lies on the zero planes.
  const std::optional<Window>& cell_window() const noexcept { return cells_; }
  NoiseField draw(std::uint64_t seed, std::uint64_t replicate) const;
  IncrementField draw_increments(std::uint64_t seed, std::uint64_t replicate) const;

 private:
  GaussianSpec spec_;
  ThetaVector theta_;
  Window window_;
  std::optional<Window> cells_;
  std::optional<SeparableSampler> sampler_;
};

NoiseField extend_to_lattice(const GaussianSpec& spec, const ThetaVector& theta, const Window& window,
                             std::uint64_t seed, std::uint64_t replicate = 0);

struct FirstKindSample {
  SeriesSolution solution;
  NoiseField noise;
};

/// Noise on the series source window followed by the truncated series solution.
class FirstKindGenerator {
 public:
  FirstKindGenerator(GaussianSpec spec, ThetaVector theta, Window window, int depth);

  int depth() const noexcept { return depth_; }
  FirstKindSample draw(std::uint64_t seed, std::uint64_t replicate) const;

 private:
  Window window_;
  int depth_;
  NoiseGenerator noise_;
};

SeriesSolution fou_first_kind(const GaussianSpec& spec, const ThetaVector& theta, const Window& window, int depth,
                              std::uint64_t seed, std::uint64_t replicate = 0);

/// The sheet observed at exponential coordinates, Y_{e^t} = X(e^{theta_1 t_1}, ..., e^{theta_N t_N}).
/// Self-similar on the lattice with exponent H (.) theta.
class SelfSimilarSheetGenerator {
 public:
  SelfSimilarSheetGenerator(GaussianSpec spec, ThetaVector time_scale, Window window);

  const ThetaVector& exponent() const noexcept { return exponent_; }
  SelfSimilarField draw(std::uint64_t seed, std::uint64_t replicate) const;

 private:
  Window window_;
  ThetaVector exponent_;
  std::optional<GaussianSampler> sampler_;
};

/// Inverse Lamperti transform (exponent H (.) theta) of the exponential-coordinate sheet.
class SecondKindGenerator {
 public:
  SecondKindGenerator(GaussianSpec spec, ThetaVector theta, Window window);
  LatticeField draw(std::uint64_t seed, std::uint64_t replicate) const;

 private:
  SelfSimilarSheetGenerator sheet_;
};

LatticeField fou_second_kind(const GaussianSpec& spec, const ThetaVector& theta, const Window& window,
                             std::uint64_t seed, std::uint64_t replicate = 0);

/// The sheet itself at integer points of a window in the nonnegative orthant.
class SheetGenerator {
 public:
  SheetGenerator(GaussianSpec spec, Window window);
  LatticeField draw(std::uint64_t seed, std::uint64_t replicate) const;

 private:
  Window window_;
  std::optional<GaussianSampler> sampler_;
};

/// Replicates 0..count-1 of any generator with a draw(seed, replicate) -> LatticeField.
template <class Draw>
Ensemble make_ensemble(std::uint64_t seed, std::size_t count, Draw&& draw);

}  // namespace latfield

#include "latfield/parallel.hpp"
#include "latfield/rng.hpp"

namespace latfield {

template <class Draw>
Ensemble make_ensemble(std::uint64_t seed, std::size_t count, Draw&& draw) {
  Ensemble e;
  e.seed = seed;
  e.generator_tag = std::string(kGeneratorTag);
  e.replicates.resize(count);
  parallel_for(count, [&](std::size_t r) { e.replicates[r] = draw(seed, static_cast<std::uint64_t>(r)); });
  return e;
}

}  // namespace latfield
