#include "latfield/stats.hpp"

#include <cmath>
#include <limits>

#include "latfield/operators.hpp"

namespace latfield {

void Ensemble::validate() const {
  if (replicates.size() < 2) {
    throw LatticeError(ErrorKind::InvalidArgument, "an ensemble needs at least 2 replicates");
  }
  for (const auto& r : replicates) {
    if (!(r.window() == replicates.front().window())) {
      throw LatticeError(ErrorKind::DimensionMismatch,
                         "replicate window " + r.window().to_string() + " differs from " +
                             replicates.front().window().to_string());
    }
  }
}

Moments empirical_moments(const Ensemble& e, const MultiIndex& t) {
  e.validate();
  if (!e.window().contains(t)) {
    throw LatticeError(ErrorKind::OutOfWindow, t.to_string() + " outside " + e.window().to_string());
  }
  const auto n = static_cast<double>(e.size());
  CompensatedSum s;
  for (const auto& r : e.replicates) s += r(t);
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (const auto& r : e.replicates) {
    const double d = r(t) - mean;
    ss += d * d;
  }
  const double var = ss.value() / (n - 1.0);
  return Moments{mean, var, std::sqrt(var / n)};
}

void TestReport::add(ComparisonDetail d) {
  const double a = std::fabs(d.z);
  if (a > max_abs_z || std::isnan(a)) max_abs_z = std::isnan(a) ? std::numeric_limits<double>::infinity() : a;
  pass = max_abs_z <= threshold;
  details.push_back(std::move(d));
}

double paired_z(std::span<const double> differences) {
  const auto n = static_cast<double>(differences.size());
  CompensatedSum s;
  for (double d : differences) s += d;
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (double d : differences) ss += (d - mean) * (d - mean);
  const double var = ss.value() / (n - 1.0);
  if (var == 0.0) {
    if (mean == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), mean);
  }
  return mean / std::sqrt(var / n);
}

std::vector<MultiIndex> default_shifts(int n) {
  std::vector<MultiIndex> out;
  for (int l = 0; l < n; ++l) out.push_back(MultiIndex::unit(n, l));
  if (n > 1) out.push_back(MultiIndex::filled(n, 1));
  return out;
}

std::vector<MultiIndex> default_lags(int n) {
  std::vector<MultiIndex> out{MultiIndex(n)};
  for (int l = 0; l < n; ++l) out.push_back(MultiIndex::unit(n, l));
  return out;
}

namespace {

void require_replicates(const Ensemble& e) {
  e.validate();
  if (e.size() < kMinReplicates) {
    throw LatticeError(ErrorKind::InsufficientReplicates, std::to_string(e.size()) + " replicates, need at least " +
                                                              std::to_string(kMinReplicates));
  }
}

}  // namespace

TestReport shift_invariance_test(const Ensemble& e, std::span<const MultiIndex> shifts,
                                 std::span<const MultiIndex> lags, double threshold_z) {
  require_replicates(e);
  const Window& w = e.window();
  const int n = w.dim();
  TestReport report;
  report.statistic_name = "shift_invariance";
  report.threshold = threshold_z;
  std::vector<double> diff(e.size());

  for (const auto& s : shifts) {
    require_same_dim(n, s.size(), "shift");
    std::size_t admissible = 0;
    for_each_point(w, [&](const MultiIndex& t) {
      if (!w.contains(t + s)) return;
      ++admissible;
      const MultiIndex ts = t + s;
      for (std::size_t r = 0; r < e.size(); ++r) diff[r] = e.replicates[r](ts) - e.replicates[r](t);
      report.add({"mean", t, s, MultiIndex(n), paired_z(diff)});
    });
    if (admissible == 0) {
      throw LatticeError(ErrorKind::WindowTooSmall, "no point t with t and t+" + s.to_string() + " inside " +
                                                        w.to_string());
    }
    for (const auto& lag : lags) {
      require_same_dim(n, lag.size(), "lag");
      std::size_t with_lag = 0;
      for_each_point(w, [&](const MultiIndex& t) {
        const MultiIndex tl = t + lag, ts = t + s, tsl = t + s + lag;
        if (!w.contains(tl) || !w.contains(ts) || !w.contains(tsl)) return;
        ++with_lag;
        for (std::size_t r = 0; r < e.size(); ++r) {
          const auto& x = e.replicates[r];
          diff[r] = x(ts) * x(tsl) - x(t) * x(tl);
        }
        report.add({"product", t, s, lag, paired_z(diff)});
      });
      if (with_lag == 0) {
        throw LatticeError(ErrorKind::WindowTooSmall, "no admissible point for shift " + s.to_string() + " and lag " +
                                                          lag.to_string() + " inside " + w.to_string());
      }
    }
  }
  return report;
}

TestReport increment_stationarity_test(const Ensemble& e, std::span<const MultiIndex> shifts,
                                       std::span<const MultiIndex> lags, double threshold_z) {
  require_replicates(e);
  Ensemble inc;
  inc.seed = e.seed;
  inc.generator_tag = e.generator_tag;
  inc.replicates.reserve(e.size());
  for (const auto& r : e.replicates) inc.replicates.push_back(increment_field(r).inner);
  TestReport report = shift_invariance_test(inc, shifts, lags, threshold_z);
  report.statistic_name = "increment_stationarity";
  return report;
}

}  // namespace latfield
