#include "latfield/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace latfield {

bool on_zero_plane(const MultiIndex& t) noexcept {
  const std::int64_t s = t.sum();
  return s <= 0 && s >= -(t.size() - 1);
}

NoiseField NoiseField::checked(LatticeField field, ThetaVector theta) {
  require_same_dim(field.dim(), theta.size(), "noise field vs theta");
  for_each_point(field.window(), [&](const MultiIndex& t) {
    if (on_zero_plane(t) && field(t) != 0.0) {
      throw LatticeError(ErrorKind::ZeroPlaneViolation,
                         "G" + t.to_string() + " = " + std::to_string(field(t)) + " must be exactly 0");
    }
  });
  return NoiseField{std::move(field), std::move(theta)};
}

Membership term_membership(const MultiIndex& t, const MultiIndex& j) {
  require_same_dim(t.size(), j.size(), "term_membership");
  const int n = t.size();
  bool below = true, above = true;
  for (int l = 0; l < n; ++l) {
    below = below && j[l] <= t[l];
    above = above && j[l] >= t[l] + 1;
  }
  const std::int64_t s = j.sum();
  if (below && s >= 1) return Membership::PositiveBranch;
  if (above && s <= 0) return Membership::NegativeBranch;
  return Membership::Excluded;
}

std::optional<Window> term_index_window(const Window& out) {
  const int n = out.dim();
  const MultiIndex top = out.hi() - MultiIndex::filled(n, 1);
  const MultiIndex& bottom = out.origin;
  std::optional<MultiIndex> lo, hi;
  auto merge = [&](const MultiIndex& a, const MultiIndex& b) {
    if (!lo) {
      lo = a;
      hi = b;
      return;
    }
    for (int l = 0; l < n; ++l) {
      (*lo)[l] = std::min((*lo)[l], a[l]);
      (*hi)[l] = std::max((*hi)[l], b[l]);
    }
  };
  // Positive branch: j_l in [1 - sum_{m != l} t_m, t_l]; extremes at the top corner.
  if (top.sum() >= 1) {
    MultiIndex a(n), b(n);
    for (int l = 0; l < n; ++l) {
      a[l] = 1 - (top.sum() - top[l]);
      b[l] = top[l];
    }
    merge(a, b);
  }
  // Negative branch: j_l in [t_l + 1, -sum_{m != l} (t_m + 1)]; extremes at the bottom corner.
  if (bottom.sum() <= -n) {
    MultiIndex a(n), b(n);
    for (int l = 0; l < n; ++l) {
      a[l] = bottom[l] + 1;
      b[l] = -(bottom.sum() - bottom[l]) - (n - 1);
    }
    merge(a, b);
  }
  if (!lo) return std::nullopt;
  return Window::from_bounds(*lo, *hi + MultiIndex::filled(n, 1));
}

std::optional<Window> required_source_window(const Window& out) {
  auto terms = term_index_window(out);
  if (!terms) return std::nullopt;
  const MultiIndex one = MultiIndex::filled(out.dim(), 1);
  return Window(terms->origin - one, terms->extents + one);
}

std::optional<Window> required_increment_window(const Window& out) { return term_index_window(out); }

namespace {

/// e^{-<k,Theta>} Delta_k Y on the term box.
LatticeField weighted_increments(const SelfSimilarField& y, const Window& terms) {
  const ExponentialWeights decay(y.theta, terms, -1);
  const auto& corners = corner_signs(terms.dim());
  return LatticeField::generate(terms, [&](const MultiIndex& k) {
    CompensatedSum acc;
    for (const auto& c : corners) acc += c.sign * y.inner(k - c.offset);
    return decay(k) * acc.value();
  });
}

void require_source(const SelfSimilarField& y, const Window& out) {
  require_same_dim(y.inner.dim(), out.dim(), "source vs requested window");
  require_same_dim(y.theta.size(), out.dim(), "theta vs requested window");
  const auto need = required_source_window(out);
  if (need && !y.inner.window().contains(*need)) {
    throw LatticeError(ErrorKind::SourceWindowTooSmall, "G on " + out.to_string() + " needs Y on " +
                                                            need->to_string() + ", have " +
                                                            y.inner.window().to_string());
  }
}

class NestedSum {
 public:
  NestedSum(const LatticeField& terms, const MultiIndex& t) : terms_(terms), t_(t), n_(t.size()), k_(t.size()) {
    // suffix_[l] = t_{l+1} + ... + t_{N-1}
    std::int64_t s = 0;
    for (int l = n_ - 1; l >= 0; --l) {
      suffix_[static_cast<std::size_t>(l)] = s;
      s += t[l];
    }
  }

  double positive() {
    CompensatedSum acc;
    positive_level(0, 0, acc);
    return acc.value();
  }

  double negative() {
    CompensatedSum acc;
    negative_level(0, 0, acc);
    return (n_ % 2 == 0) ? acc.value() : -acc.value();
  }

 private:
  void positive_level(int l, std::int64_t prefix, CompensatedSum& acc) {
    const std::int64_t lower = 1 - prefix - suffix_[static_cast<std::size_t>(l)];
    const std::int64_t upper = t_[l];
    for (std::int64_t k = lower; k <= upper; ++k) {
      k_[l] = k;
      if (l + 1 == n_) {
        acc += terms_(k_);
      } else {
        positive_level(l + 1, prefix + k, acc);
      }
    }
  }

  void negative_level(int l, std::int64_t prefix, CompensatedSum& acc) {
    const std::int64_t lower = t_[l] + 1;
    const std::int64_t upper = -prefix - suffix_[static_cast<std::size_t>(l)] - n_ + (l + 1);
    for (std::int64_t k = lower; k <= upper; ++k) {
      k_[l] = k;
      if (l + 1 == n_) {
        acc += terms_(k_);
      } else {
        negative_level(l + 1, prefix + k, acc);
      }
    }
  }

  const LatticeField& terms_;
  const MultiIndex& t_;
  int n_;
  MultiIndex k_;
  std::array<std::int64_t, kMaxDim> suffix_{};
};

}  // namespace

NoiseField construct_g(const SelfSimilarField& y, const Window& window) {
  require_source(y, window);
  const auto term_box = term_index_window(window);
  if (!term_box) return NoiseField{LatticeField(window), y.theta};
  const LatticeField terms = weighted_increments(y, *term_box);
  const int n = window.dim();
  LatticeField g = LatticeField::generate(window, [&](const MultiIndex& t) {
    const std::int64_t s = t.sum();
    // Empty sums; keep these exact rather than relying on loop bounds.
    if (s <= 0 && s > -n) return 0.0;
    NestedSum sum(terms, t);
    return s >= 1 ? sum.positive() : sum.negative();
  });
  return NoiseField{std::move(g), y.theta};
}

double construct_g_oracle(const SelfSimilarField& y, const MultiIndex& t) {
  const Window point(t, MultiIndex::filled(t.size(), 1));
  require_source(y, point);
  const Window& src = y.inner.window();
  const MultiIndex one = MultiIndex::filled(src.dim(), 1);
  for (int l = 0; l < src.dim(); ++l) {
    if (src.extents[l] < 2) return 0.0;  // no complete unit cell, so no terms
  }
  const Window cells(src.origin + one, src.extents - one);
  const auto& corners = corner_signs(t.size());
  const double sign_negative = (t.size() % 2 == 0) ? 1.0 : -1.0;
  CompensatedSum acc;
  for_each_point(cells, [&](const MultiIndex& j) {
    const Membership m = term_membership(t, j);
    if (m == Membership::Excluded) return;
    double inc = 0.0;
    for (const auto& c : corners) inc += c.sign * y.inner(j - c.offset);
    const double term = std::exp(-y.theta.dot(j)) * inc;
    acc += (m == Membership::PositiveBranch) ? term : sign_negative * term;
  });
  return acc.value();
}

bool binomial_identity_check(int m) {
  if (m < 1 || m > 60) {
    throw LatticeError(ErrorKind::OutOfRange, "M = " + std::to_string(m) + " outside [1, 60]");
  }
  using u128 = unsigned __int128;
  std::vector<u128> row{1};
  for (int r = 1; r <= m; ++r) {
    std::vector<u128> next(static_cast<std::size_t>(r) + 1, 1);
    for (int k = 1; k < r; ++k) next[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k - 1)] + row[static_cast<std::size_t>(k)];
    row = std::move(next);
  }
  const u128 target = u128{1} << (m - 1);
  u128 even = 0, odd = 0;
  if (m % 2 == 1) {
    for (int i = 0; i <= (m - 1) / 2; ++i) {
      even += row[static_cast<std::size_t>(2 * i)];
      odd += row[static_cast<std::size_t>(2 * i + 1)];
    }
  } else {
    for (int i = 0; i <= m / 2; ++i) even += row[static_cast<std::size_t>(2 * i)];
    for (int i = 0; i <= m / 2 - 1; ++i) odd += row[static_cast<std::size_t>(2 * i + 1)];
  }
  return even == target && odd == target;
}

NoiseField integrate_increments(const IncrementField& delta, const ThetaVector& theta, const Window& out) {
  const LatticeField& d = delta.inner;
  const int n = out.dim();
  require_same_dim(d.dim(), n, "increments vs output window");
  require_same_dim(theta.size(), n, "theta vs output window");
  const auto cells = required_increment_window(out);
  if (!cells) return NoiseField{LatticeField(out), theta};

  const MultiIndex one = MultiIndex::filled(n, 1);
  const Window work = out.hull(Window(cells->origin - one, cells->extents + one));
  const std::size_t volume = work.volume();
  std::vector<double> value(volume, 0.0);
  std::vector<char> known(volume, 0);
  // First increment cell (or dependency) blocking each unknown point.
  std::map<std::size_t, MultiIndex> blocker;

  std::map<std::int64_t, std::vector<std::size_t>> diagonals;
  for (std::size_t k = 0; k < volume; ++k) {
    const MultiIndex t = work.point_at(k);
    if (on_zero_plane(t)) {
      known[k] = 1;
    } else {
      diagonals[t.sum()].push_back(k);
    }
  }

  auto lookup = [&](const MultiIndex& u, const double*& v) -> bool {
    static constexpr double zero = 0.0;
    if (on_zero_plane(u)) {
      v = &zero;
      return true;
    }
    if (!work.contains(u)) return false;
    const std::size_t k = work.offset_of(u);
    v = &value[k];
    return known[k] != 0;
  };

  const auto& corners = corner_signs(n);
  auto solve = [&](std::size_t k, const MultiIndex& cell, std::size_t skip) {
    if (!d.contains(cell)) {
      blocker.emplace(k, cell);
      return;
    }
    CompensatedSum rest;
    for (std::size_t c = 0; c < corners.size(); ++c) {
      if (c == skip) continue;
      const MultiIndex u = cell - corners[c].offset;
      const double* v = nullptr;
      if (!lookup(u, v)) {
        auto it = work.contains(u) ? blocker.find(work.offset_of(u)) : blocker.end();
        blocker.emplace(k, it != blocker.end() ? it->second : u);
        return;
      }
      rest += corners[c].sign * *v;
    }
    const double own = d(cell) - rest.value();
    value[k] = corners[skip].sign > 0 ? own : -own;
    known[k] = 1;
  };

  // Positive diagonals: G_t = Delta_t G - sum_{i != 0} (-1)^{|i|} G_{t-i}.
  for (auto it = diagonals.lower_bound(1); it != diagonals.end(); ++it) {
    for (std::size_t k : it->second) {
      solve(k, work.point_at(k), 0);
    }
  }
  // Negative diagonals, outward: (-1)^N G_t = Delta_{t+1} G - sum_{i != 1} (-1)^{|i|} G_{t+1-i}.
  const std::size_t all_ones = corners.size() - 1;
  for (auto it = std::make_reverse_iterator(diagonals.upper_bound(-n)); it != diagonals.rend(); ++it) {
    for (std::size_t k : it->second) {
      solve(k, work.point_at(k) + one, all_ones);
    }
  }

  LatticeField g(out);
  for_each_point(out, [&](const MultiIndex& t) {
    const std::size_t k = work.offset_of(t);
    if (!known[k]) {
      auto b = blocker.find(k);
      throw LatticeError(ErrorKind::IncompleteCoverage,
                         "G" + t.to_string() + " needs increment at " +
                             (b != blocker.end() ? b->second.to_string() : std::string("?")) + " outside " +
                             d.window().to_string());
    }
    g.set(t, value[k]);
  });
  return NoiseField{std::move(g), theta};
}

namespace {

void check_axis_order(std::span<const int> order, int n) {
  if (static_cast<int>(order.size()) != n) {
    throw LatticeError(ErrorKind::InvalidArgument, "axis order must list every axis once");
  }
  std::vector<int> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (int l = 0; l < n; ++l) {
    if (sorted[static_cast<std::size_t>(l)] != l) {
      throw LatticeError(ErrorKind::InvalidArgument, "axis order is not a permutation");
    }
  }
}

struct WeightedIncrements {
  Window box;
  LatticeField terms;  // e^{<j,Theta>} Delta_j G on box
};

WeightedIncrements weighted_increment_box(const NoiseField& g, const MultiIndex& t, int depth) {
  const int n = t.size();
  require_same_dim(g.inner.dim(), n, "noise vs point");
  if (depth < 0) throw LatticeError(ErrorKind::InvalidArgument, "depth must be nonnegative");
  const MultiIndex reach = MultiIndex::filled(n, depth);
  const Window box = Window::from_bounds(t - reach, t + MultiIndex::filled(n, 1));
  const MultiIndex one = MultiIndex::filled(n, 1);
  const Window need(box.origin - one, box.extents + one);
  if (!g.inner.window().contains(need)) {
    throw LatticeError(ErrorKind::WindowTooSmall, "truncated sum at depth " + std::to_string(depth) + " needs G on " +
                                                      need.to_string() + ", have " + g.inner.window().to_string());
  }
  const ExponentialWeights growth(g.theta, box, +1);
  const auto& corners = corner_signs(n);
  LatticeField terms = LatticeField::generate(box, [&](const MultiIndex& j) {
    CompensatedSum acc;
    for (const auto& c : corners) acc += c.sign * g.inner(j - c.offset);
    return growth(j) * acc.value();
  });
  return {box, std::move(terms)};
}

double iterated_sum(const LatticeField& terms, const Window& box, std::span<const int> order, int level,
                    MultiIndex& j) {
  const int axis = order[static_cast<std::size_t>(level)];
  CompensatedSum acc;
  for (std::int64_t k = box.hi()[axis] - 1; k >= box.origin[axis]; --k) {
    j[axis] = k;
    acc += (level + 1 == static_cast<int>(order.size())) ? terms(j) : iterated_sum(terms, box, order, level + 1, j);
  }
  return acc.value();
}

}  // namespace

double truncated_weighted_sum(const NoiseField& g, const MultiIndex& t, int depth, std::span<const int> axis_order) {
  const int n = t.size();
  std::vector<int> natural(static_cast<std::size_t>(n));
  std::iota(natural.begin(), natural.end(), 0);
  if (axis_order.empty()) axis_order = natural;
  check_axis_order(axis_order, n);
  const auto w = weighted_increment_box(g, t, depth);
  MultiIndex j = t;
  return iterated_sum(w.terms, w.box, axis_order, 0, j);
}

MembershipReport class_membership_check(const NoiseField& g, const MultiIndex& t, std::span<const int> depths) {
  if (depths.size() < 3) {
    throw LatticeError(ErrorKind::InvalidArgument, "membership check needs at least 3 depths");
  }
  if (!std::is_sorted(depths.begin(), depths.end()) ||
      std::adjacent_find(depths.begin(), depths.end()) != depths.end() || depths.front() < 0) {
    throw LatticeError(ErrorKind::InvalidArgument, "depths must be strictly increasing and nonnegative");
  }
  const int n = t.size();
  const auto w = weighted_increment_box(g, t, depths.back());
  const ThetaVector& theta = g.theta;
  const double min_theta = theta.min_theta();

  MembershipReport rep;
  rep.point = t;
  rep.depths.assign(depths.begin(), depths.end());
  rep.expected_rate = std::exp(-min_theta);

  std::vector<int> natural(static_cast<std::size_t>(n));
  std::iota(natural.begin(), natural.end(), 0);
  for (int m : depths) {
    const Window box = Window::from_bounds(t - MultiIndex::filled(n, m), t + MultiIndex::filled(n, 1));
    const LatticeField sub = restrict_to(w.terms, box);
    MultiIndex j = t;
    rep.partial_sums.push_back(iterated_sum(sub, box, natural, 0, j));
  }

  const double top = theta.dot(t);
  std::vector<double> normalised;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k + 1 < rep.partial_sums.size(); ++k) {
    const double d = std::fabs(rep.partial_sums[k + 1] - rep.partial_sums[k]);
    rep.differences.push_back(d);
    normalised.push_back(d * std::exp(depths[k] * min_theta - top));
    if (d > 0.0) {
      xs.push_back(depths[k]);
      ys.push_back(std::log(d));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    rep.fitted_rate = std::exp(sxy / sxx);
  }

  const std::size_t half = (normalised.size() + 1) / 2;
  const double early = *std::max_element(normalised.begin(), normalised.begin() + static_cast<std::ptrdiff_t>(half));
  const double late = half < normalised.size()
                          ? *std::max_element(normalised.begin() + static_cast<std::ptrdiff_t>(half), normalised.end())
                          : 0.0;
  if (early > 0.0) {
    rep.envelope_growth = late / early;
    rep.pass = late <= 10.0 * early;
  } else {
    rep.envelope_growth = late > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    rep.pass = late == 0.0;
  }
  return rep;
}

}  // namespace latfield
