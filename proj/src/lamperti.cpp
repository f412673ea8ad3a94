#include "latfield/lamperti.hpp"

#include <cmath>

namespace latfield {

namespace {

void guard_exponents(const ThetaVector& theta, const Window& w) {
  const double m = max_abs_dot(theta, w);
  if (m > kExponentGuard) {
    throw LatticeError(ErrorKind::OverflowGuard, "|<t,Theta>| reaches " + std::to_string(m) + " on " + w.to_string() +
                                                     " (limit " + std::to_string(kExponentGuard) + ")");
  }
}

}  // namespace

ExponentialWeights::ExponentialWeights(const ThetaVector& theta, const Window& window, int sign) : window_(window) {
  require_same_dim(theta.size(), window.dim(), "theta vs window");
  guard_exponents(theta, window);
  axis_.resize(static_cast<std::size_t>(window.dim()));
  for (int l = 0; l < window.dim(); ++l) {
    const double base = std::exp(theta[l]);
    auto& table = axis_[static_cast<std::size_t>(l)];
    table.resize(static_cast<std::size_t>(window.extents[l]));
    for (std::int64_t k = 0; k < window.extents[l]; ++k) {
      const auto p = static_cast<int>(sign * (window.origin[l] + k));
      table[static_cast<std::size_t>(k)] = std::pow(base, p);
    }
  }
}

double ExponentialWeights::operator()(const MultiIndex& t) const noexcept {
  double m = 1.0;
  for (int l = 0; l < window_.dim(); ++l) {
    m *= axis_[static_cast<std::size_t>(l)][static_cast<std::size_t>(t[l] - window_.origin[l])];
  }
  return m;
}

SelfSimilarField lamperti_forward(const LatticeField& x, const ThetaVector& theta) {
  require_same_dim(theta.size(), x.dim(), "lamperti_forward");
  const ExponentialWeights weight(theta, x.window(), +1);
  return SelfSimilarField{LatticeField::generate(x.window(), [&](const MultiIndex& t) { return weight(t) * x(t); }),
                          theta};
}

LatticeField lamperti_inverse(const SelfSimilarField& y) {
  require_same_dim(y.theta.size(), y.inner.dim(), "lamperti_inverse");
  const ExponentialWeights weight(y.theta, y.inner.window(), -1);
  return LatticeField::generate(y.inner.window(), [&](const MultiIndex& t) { return weight(t) * y.inner(t); });
}

TestReport selfsimilar_scaling_check(std::span<const SelfSimilarField> samples, const MultiIndex& s,
                                     double threshold_z) {
  if (samples.size() < kMinReplicates) {
    throw LatticeError(ErrorKind::InsufficientReplicates, std::to_string(samples.size()) +
                                                              " replicates, need at least " +
                                                              std::to_string(kMinReplicates));
  }
  const Window& w = samples.front().inner.window();
  const ThetaVector& theta = samples.front().theta;
  require_same_dim(w.dim(), s.size(), "scaling shift");
  for (const auto& y : samples) {
    if (!(y.inner.window() == w) || y.theta.values() != theta.values()) {
      throw LatticeError(ErrorKind::InvalidArgument, "replicates must share window and theta");
    }
  }
  const double scale = std::exp(theta.dot(s));
  TestReport report;
  report.statistic_name = "selfsimilar_scaling";
  report.threshold = threshold_z;
  std::vector<double> diff(samples.size());
  std::size_t admissible = 0;
  for_each_point(w, [&](const MultiIndex& t) {
    const MultiIndex ts = t + s;
    if (!w.contains(ts)) return;
    ++admissible;
    for (std::size_t r = 0; r < samples.size(); ++r) diff[r] = samples[r].inner(ts) - scale * samples[r].inner(t);
    report.add({"mean", t, s, MultiIndex(w.dim()), paired_z(diff)});
    for (std::size_t r = 0; r < samples.size(); ++r) {
      const double a = samples[r].inner(ts), b = scale * samples[r].inner(t);
      diff[r] = a * a - b * b;
    }
    report.add({"second_moment", t, s, MultiIndex(w.dim()), paired_z(diff)});
  });
  if (admissible == 0) {
    throw LatticeError(ErrorKind::WindowTooSmall, "no point with t and t+" + s.to_string() + " inside " + w.to_string());
  }
  return report;
}

}  // namespace latfield
