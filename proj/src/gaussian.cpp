#include "latfield/gaussian.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fmt/format.h>

namespace latfield {

void GaussianSpec::validate() const {
  check_dimension(dim());
  for (std::size_t l = 0; l < hurst.size(); ++l) {
    const double h = hurst[l];
    if (!(h > 0.0 && h < 1.0))
      throw LatticeError(ErrorKind::InvalidArgument,
                         fmt::format("hurst index H_{} = {} must lie strictly between 0 and 1", l + 1, h));
  }
  if (!(variance_at_one > 0.0) || !std::isfinite(variance_at_one))
    throw LatticeError(ErrorKind::InvalidArgument,
                       fmt::format("variance_at_one = {} must be positive and finite", variance_at_one));
}

double fbs_covariance(const GaussianSpec& spec, std::span<const double> s, std::span<const double> t) {
  const int n = spec.dim();
  require_same_dim(n, static_cast<int>(s.size()), "fbs_covariance s");
  require_same_dim(n, static_cast<int>(t.size()), "fbs_covariance t");
  double c = spec.variance_at_one;
  for (int l = 0; l < n; ++l) {
    const double a = s[l], b = t[l];
    if (a < 0.0 || b < 0.0)
      throw LatticeError(ErrorKind::NegativeCoordinate,
                         fmt::format("sheet coordinates must be >= 0, got {} and {} on axis {}", a, b, l + 1));
    if (a == 0.0 || b == 0.0) return 0.0;
    const double h2 = 2.0 * spec.hurst[static_cast<std::size_t>(l)];
    c *= 0.5 * (std::pow(a, h2) + std::pow(b, h2) - std::pow(std::fabs(a - b), h2));
  }
  return c;
}

double cell_increment_covariance(const GaussianSpec& spec, const MultiIndex& c, const MultiIndex& d) {
  const int n = spec.dim();
  require_same_dim(n, c.size(), "cell c");
  require_same_dim(n, d.size(), "cell d");
  // Shift both cells into the positive orthant; the sheet has stationary rectangular increments.
  std::array<double, kMaxDim> cs{}, ds{};
  for (int l = 0; l < n; ++l) {
    const std::int64_t off = 1 - std::min(c[l], d[l]);
    cs[static_cast<std::size_t>(l)] = static_cast<double>(c[l] + off);
    ds[static_cast<std::size_t>(l)] = static_cast<double>(d[l] + off);
  }
  const auto& corners = corner_signs(n);
  CompensatedSum acc;
  std::array<double, kMaxDim> p{}, q{};
  for (const auto& ci : corners) {
    for (int l = 0; l < n; ++l) p[l] = cs[l] - static_cast<double>(ci.offset[l]);
    for (const auto& di : corners) {
      for (int l = 0; l < n; ++l) q[l] = ds[l] - static_cast<double>(di.offset[l]);
      const double v = fbs_covariance(spec, std::span<const double>(p.data(), n), std::span<const double>(q.data(), n));
      acc.add(ci.sign * di.sign * v);
    }
  }
  return acc.value();
}

CovarianceMatrix sheet_covariance(const GaussianSpec& spec, std::vector<std::vector<double>> points) {
  spec.validate();
  const auto m = static_cast<Eigen::Index>(points.size());
  CovarianceMatrix cov;
  cov.entries.resize(m, m);
  parallel_for(points.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = fbs_covariance(spec, points[i], points[j]);
      cov.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      cov.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  cov.points = std::move(points);
  return cov;
}

CovarianceMatrix increment_covariance(const GaussianSpec& spec, const Window& cells) {
  spec.validate();
  const int n = spec.dim();
  require_same_dim(n, cells.dim(), "increment_covariance window");
  // Stationary in c - d: tabulate each lag once.
  MultiIndex lag_lo(n), lag_ext(n);
  for (int l = 0; l < n; ++l) {
    lag_lo[l] = 1 - cells.extents[l];
    lag_ext[l] = 2 * cells.extents[l] - 1;
  }
  const Window lags(lag_lo, lag_ext);
  std::vector<double> table(lags.volume());
  const MultiIndex base = MultiIndex::filled(n, 0);
  parallel_for(table.size(), [&](std::size_t k) {
    table[k] = cell_increment_covariance(spec, lags.point_at(k), base);
  });

  CovarianceMatrix cov;
  const auto m = static_cast<Eigen::Index>(cells.volume());
  cov.entries.resize(m, m);
  std::vector<MultiIndex> pts;
  pts.reserve(cells.volume());
  for_each_point(cells, [&](const MultiIndex& t) { pts.push_back(t); });
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      cov.entries(i, j) = table[lags.offset_of(pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)])];
  cov.points.reserve(pts.size());
  for (const auto& t : pts) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) p[static_cast<std::size_t>(l)] = static_cast<double>(t[l]);
    cov.points.push_back(std::move(p));
  }
  return cov;
}

GaussianSampler::GaussianSampler(const CovarianceMatrix& cov) : dim_(cov.dim()) {
  const Eigen::MatrixXd& a = cov.entries;
  if (a.rows() != a.cols())
    throw LatticeError(ErrorKind::InvalidArgument, "covariance matrix must be square");
  const double scale = a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, scale))
        throw LatticeError(ErrorKind::InvalidArgument, fmt::format("covariance is not symmetric at ({}, {})", i, j));
    if (!std::isfinite(a(i, i)))
      throw LatticeError(ErrorKind::NonFiniteValue, fmt::format("covariance entry ({0}, {0}) is not finite", i));
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double v = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (v < 0.0)
      throw LatticeError(ErrorKind::NotPositiveSemidefinite, fmt::format("negative variance {} at index {}", v, i));
    if (v > 0.0) {
      active_.push_back(i);
      continue;
    }
    for (std::size_t j = 0; j < dim_; ++j)
      if (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0)
        throw LatticeError(ErrorKind::NotPositiveSemidefinite,
                           fmt::format("zero variance at index {} with nonzero covariance", i));
  }
  const auto k = static_cast<Eigen::Index>(active_.size());
  if (k == 0) return;
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      sub(i, j) = a(static_cast<Eigen::Index>(active_[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(active_[static_cast<std::size_t>(j)]));
  const double mean_diag = sub.trace() / static_cast<double>(k);

  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt;
  for (double rel : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Eigen::MatrixXd shifted = sub;
    shifted.diagonal().array() += rel * mean_diag;
    llt.emplace(shifted);
    if (llt->info() == Eigen::Success) {
      jitter_ = rel * mean_diag;
      break;
    }
    llt.reset();
  }
  if (!llt)
    throw LatticeError(ErrorKind::NotPositiveSemidefinite,
                       fmt::format("Cholesky failed with jitter up to 1e-6 * trace/dim on a {}x{} matrix", k, k));
  const Eigen::MatrixXd l = llt->matrixL();
  lower_.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) lower_.push_back(l(i, j));
}

void GaussianSampler::apply(const double* z, std::ptrdiff_t z_stride, double* out, std::ptrdiff_t out_stride) const {
  const std::size_t k = active_.size();
  for (std::size_t i = 0; i < dim_; ++i) out[static_cast<std::ptrdiff_t>(i) * out_stride] = 0.0;
  // Only the first k entries of z are consumed; they map onto the active indices.
  const double* row = lower_.data();
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += row[j] * z[static_cast<std::ptrdiff_t>(j) * z_stride];
    out[static_cast<std::ptrdiff_t>(active_[i]) * out_stride] = s;
    row += i + 1;
  }
}

std::vector<double> GaussianSampler::draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose) const {
  std::vector<double> out(dim_, 0.0);
  const std::size_t k = active_.size();
  if (k == 0) return out;
  auto gen = make_stream(seed, replicate, purpose);
  StandardNormal normal;
  std::vector<double> z(k);
  for (auto& v : z) v = normal(gen);
  apply(z.data(), 1, out.data(), 1);
  return out;
}

CovarianceMatrix axis_increment_covariance(double hurst, std::int64_t lo, std::int64_t count) {
  if (count < 1) throw LatticeError(ErrorKind::InvalidArgument, "axis covariance needs at least one cell");
  const GaussianSpec one{{hurst}, 1.0};
  one.validate();
  std::vector<double> gamma(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k)
    gamma[static_cast<std::size_t>(k)] = cell_increment_covariance(one, MultiIndex{k}, MultiIndex{0});
  CovarianceMatrix cov;
  cov.entries.resize(count, count);
  for (std::int64_t i = 0; i < count; ++i) {
    cov.points.push_back({static_cast<double>(lo + 1 + i)});
    for (std::int64_t j = 0; j < count; ++j) cov.entries(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  }
  return cov;
}

SeparableSampler::SeparableSampler(Window window, const std::vector<CovarianceMatrix>& axis, double scale)
    : window_(std::move(window)), sqrt_scale_(std::sqrt(scale)) {
  require_same_dim(window_.dim(), static_cast<int>(axis.size()), "separable sampler axes");
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw LatticeError(ErrorKind::InvalidArgument, fmt::format("covariance scale {} must be >= 0", scale));
  for (int l = 0; l < window_.dim(); ++l) {
    if (static_cast<std::int64_t>(axis[static_cast<std::size_t>(l)].dim()) != window_.extents[l])
      throw LatticeError(ErrorKind::DimensionMismatch,
                         fmt::format("axis {} covariance has {} rows for extent {}", l + 1,
                                     axis[static_cast<std::size_t>(l)].dim(), window_.extents[l]));
    axis_.emplace_back(axis[static_cast<std::size_t>(l)]);
  }
}

std::vector<double> SeparableSampler::draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose) const {
  const std::size_t vol = window_.volume();
  std::vector<double> cur(vol), next(vol);
  auto gen = make_stream(seed, replicate, purpose);
  StandardNormal normal;
  for (auto& v : cur) v = normal(gen);
  // Mode-l products: apply the axis factor along every fibre of axis l.
  const int n = window_.dim();
  std::size_t stride = vol;
  for (int l = 0; l < n; ++l) {
    const auto ext = static_cast<std::size_t>(window_.extents[l]);
    stride /= ext;
    const std::size_t block = ext * stride;
    for (std::size_t outer = 0; outer < vol; outer += block)
      for (std::size_t inner = 0; inner < stride; ++inner)
        axis_[static_cast<std::size_t>(l)].apply(cur.data() + outer + inner, static_cast<std::ptrdiff_t>(stride),
                                                 next.data() + outer + inner, static_cast<std::ptrdiff_t>(stride));
    cur.swap(next);
  }
  for (auto& v : cur) v *= sqrt_scale_;
  return cur;
}

std::vector<std::vector<double>> sample_gaussian(const CovarianceMatrix& cov, std::uint64_t seed,
                                                 std::size_t replicates) {
  const GaussianSampler sampler(cov);
  std::vector<std::vector<double>> out(replicates);
  parallel_for(replicates, [&](std::size_t r) { out[r] = sampler.draw(seed, r); });
  return out;
}

namespace {

void require_theta_dim(const GaussianSpec& spec, const ThetaVector& theta) {
  spec.validate();
  require_same_dim(spec.dim(), theta.size(), "theta vs hurst");
}

constexpr auto purpose(StreamPurpose p) { return static_cast<std::uint32_t>(p); }

}  // namespace

NoiseGenerator::NoiseGenerator(GaussianSpec spec, ThetaVector theta, Window window)
    : spec_(std::move(spec)), theta_(std::move(theta)), window_(std::move(window)) {
  require_theta_dim(spec_, theta_);
  require_same_dim(spec_.dim(), window_.dim(), "noise window");
  cells_ = required_increment_window(window_);
  if (cells_) {
    std::vector<CovarianceMatrix> axis;
    for (int l = 0; l < spec_.dim(); ++l)
      axis.push_back(axis_increment_covariance(spec_.hurst[static_cast<std::size_t>(l)], cells_->origin[l] - 1,
                                               cells_->extents[l]));
    sampler_.emplace(*cells_, axis, spec_.variance_at_one);
  }
}

IncrementField NoiseGenerator::draw_increments(std::uint64_t seed, std::uint64_t replicate) const {
  if (!cells_) return IncrementField{LatticeField(Window(window_.origin, MultiIndex(window_.dim())))};
  return IncrementField{LatticeField(*cells_, sampler_->draw(seed, replicate, purpose(StreamPurpose::Noise)))};
}

NoiseField NoiseGenerator::draw(std::uint64_t seed, std::uint64_t replicate) const {
  if (!cells_) return NoiseField{LatticeField(window_), theta_};
  return integrate_increments(draw_increments(seed, replicate), theta_, window_);
}

NoiseField extend_to_lattice(const GaussianSpec& spec, const ThetaVector& theta, const Window& window,
                             std::uint64_t seed, std::uint64_t replicate) {
  return NoiseGenerator(spec, theta, window).draw(seed, replicate);
}

FirstKindGenerator::FirstKindGenerator(GaussianSpec spec, ThetaVector theta, Window window, int depth)
    : window_(window), depth_(depth), noise_([&] {
        if (depth <= 0)
          throw LatticeError(ErrorKind::NonPositiveDepth, fmt::format("depth must be >= 1, got {}", depth));
        return NoiseGenerator(std::move(spec), std::move(theta), series_source_window(window, depth));
      }()) {}

FirstKindSample FirstKindGenerator::draw(std::uint64_t seed, std::uint64_t replicate) const {
  NoiseField g = noise_.draw(seed, replicate);
  SeriesSolution x = series_solve(g, window_, depth_);
  return {std::move(x), std::move(g)};
}

SeriesSolution fou_first_kind(const GaussianSpec& spec, const ThetaVector& theta, const Window& window, int depth,
                              std::uint64_t seed, std::uint64_t replicate) {
  return FirstKindGenerator(spec, theta, window, depth).draw(seed, replicate).solution;
}

namespace {

ThetaVector product_exponent(const GaussianSpec& spec, const ThetaVector& scale) {
  std::vector<double> e(static_cast<std::size_t>(spec.dim()));
  for (int l = 0; l < spec.dim(); ++l) e[static_cast<std::size_t>(l)] = spec.hurst[static_cast<std::size_t>(l)] * scale[l];
  return ThetaVector(std::move(e));
}

}  // namespace

SelfSimilarSheetGenerator::SelfSimilarSheetGenerator(GaussianSpec spec, ThetaVector time_scale, Window window)
    : window_(std::move(window)), exponent_((require_theta_dim(spec, time_scale), product_exponent(spec, time_scale))) {
  const int n = spec.dim();
  require_same_dim(n, window_.dim(), "sheet window");
  // Coordinates e^{theta_l t_l} and the Lamperti multipliers must both stay representable.
  for (int l = 0; l < n; ++l) {
    const double reach = time_scale[l] * static_cast<double>(std::max(std::abs(window_.lo()[l]),
                                                                      std::abs(window_.hi()[l] - 1)));
    if (reach > kExponentGuard)
      throw LatticeError(ErrorKind::OverflowGuard,
                         fmt::format("e^(theta_{0} t_{0}) leaves the representable range on {1}", l + 1,
                                     window_.to_string()));
  }
  if (2.0 * max_abs_dot(exponent_, window_) > kExponentGuard)
    throw LatticeError(ErrorKind::OverflowGuard,
                       fmt::format("sheet variance e^(2<t, H theta>) overflows on {}", window_.to_string()));
  std::vector<std::vector<double>> pts;
  pts.reserve(window_.volume());
  for_each_point(window_, [&](const MultiIndex& t) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) p[static_cast<std::size_t>(l)] = std::exp(time_scale[l] * static_cast<double>(t[l]));
    pts.push_back(std::move(p));
  });
  sampler_.emplace(sheet_covariance(spec, std::move(pts)));
}

SelfSimilarField SelfSimilarSheetGenerator::draw(std::uint64_t seed, std::uint64_t replicate) const {
  return {LatticeField(window_, sampler_->draw(seed, replicate, purpose(StreamPurpose::SelfSimilar))), exponent_};
}

SecondKindGenerator::SecondKindGenerator(GaussianSpec spec, ThetaVector theta, Window window)
    : sheet_(std::move(spec), std::move(theta), std::move(window)) {}

LatticeField SecondKindGenerator::draw(std::uint64_t seed, std::uint64_t replicate) const {
  return lamperti_inverse(sheet_.draw(seed, replicate));
}

LatticeField fou_second_kind(const GaussianSpec& spec, const ThetaVector& theta, const Window& window,
                             std::uint64_t seed, std::uint64_t replicate) {
  return SecondKindGenerator(spec, theta, window).draw(seed, replicate);
}

SheetGenerator::SheetGenerator(GaussianSpec spec, Window window) : window_(std::move(window)) {
  spec.validate();
  const int n = spec.dim();
  require_same_dim(n, window_.dim(), "sheet window");
  for (int l = 0; l < n; ++l)
    if (window_.lo()[l] < 0)
      throw LatticeError(ErrorKind::NegativeCoordinate,
                         fmt::format("sheet window {} leaves the nonnegative orthant", window_.to_string()));
  std::vector<std::vector<double>> pts;
  pts.reserve(window_.volume());
  for_each_point(window_, [&](const MultiIndex& t) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) p[static_cast<std::size_t>(l)] = static_cast<double>(t[l]);
    pts.push_back(std::move(p));
  });
  sampler_.emplace(sheet_covariance(spec, std::move(pts)));
}

LatticeField SheetGenerator::draw(std::uint64_t seed, std::uint64_t replicate) const {
  return LatticeField(window_, sampler_->draw(seed, replicate, purpose(StreamPurpose::Sheet)));
}

}  // namespace latfield
