#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "latfield/error.hpp"

namespace latfield {

/// Largest supported lattice dimension. Every stencil enumerates 2^N corners.
inline constexpr int kMaxDim = 8;

/// A point of Z^N, 1 <= N <= kMaxDim, stored inline.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// All-zero index of dimension n.
  explicit MultiIndex(int n);
  MultiIndex(std::initializer_list<std::int64_t> coords);
  explicit MultiIndex(std::span<const std::int64_t> coords);

  static MultiIndex filled(int n, std::int64_t value);
  static MultiIndex unit(int n, int axis);

  int size() const noexcept { return n_; }
  std::int64_t operator[](int l) const noexcept { return c_[static_cast<std::size_t>(l)]; }
  std::int64_t& operator[](int l) noexcept { return c_[static_cast<std::size_t>(l)]; }
  std::span<const std::int64_t> coords() const noexcept { return {c_.data(), static_cast<std::size_t>(n_)}; }

  std::int64_t sum() const noexcept;

  MultiIndex& operator+=(const MultiIndex& o);
  MultiIndex& operator-=(const MultiIndex& o);
  friend MultiIndex operator+(MultiIndex a, const MultiIndex& b) { return a += b; }
  friend MultiIndex operator-(MultiIndex a, const MultiIndex& b) { return a -= b; }
  friend MultiIndex operator-(MultiIndex a);

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept;

  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int n_ = 0;
};

/// Componentwise a <= b. Throws DimensionMismatch when N differs.
bool all_leq(const MultiIndex& a, const MultiIndex& b);
/// Componentwise a < b.
bool all_less(const MultiIndex& a, const MultiIndex& b);

void check_dimension(int n);
void require_same_dim(int a, int b, const char* what);

/// Positive rate vector (theta_1, ..., theta_N).
class ThetaVector {
 public:
  ThetaVector() = default;
  explicit ThetaVector(std::vector<double> thetas);
  ThetaVector(std::initializer_list<double> thetas) : ThetaVector(std::vector<double>(thetas)) {}

  int size() const noexcept { return static_cast<int>(thetas_.size()); }
  double operator[](int l) const noexcept { return thetas_[static_cast<std::size_t>(l)]; }
  const std::vector<double>& values() const noexcept { return thetas_; }
  double min_theta() const noexcept;
  /// <t, Theta>
  double dot(const MultiIndex& t) const;

 private:
  std::vector<double> thetas_;
};

/// Rectangular window [origin, origin + extents) of Z^N.
struct Window {
  MultiIndex origin;
  MultiIndex extents;

  Window() = default;
  Window(MultiIndex origin_, MultiIndex extents_);
  /// Window from inclusive lower and exclusive upper corner.
  static Window from_bounds(const MultiIndex& lo, const MultiIndex& hi_exclusive);

  int dim() const noexcept { return origin.size(); }
  MultiIndex lo() const { return origin; }
  /// Exclusive upper corner.
  MultiIndex hi() const { return origin + extents; }
  std::size_t volume() const noexcept;
  bool contains(const MultiIndex& t) const noexcept;
  bool contains(const Window& w) const noexcept;
  /// Row-major offset; last coordinate varies fastest. No bounds check.
  std::size_t offset_of(const MultiIndex& t) const noexcept;
  MultiIndex point_at(std::size_t offset) const;

  /// Smallest window containing both.
  Window hull(const Window& w) const;
  Window shifted(const MultiIndex& s) const { return Window(origin + s, extents); }

  std::string to_string() const;
  friend bool operator==(const Window& a, const Window& b) noexcept = default;
};

/// Calls fn(t) for every t in w in row-major order.
template <class Fn>
void for_each_point(const Window& w, Fn&& fn) {
  const int n = w.dim();
  if (w.volume() == 0) return;
  MultiIndex t = w.origin;
  const MultiIndex hi = w.hi();
  while (true) {
    fn(static_cast<const MultiIndex&>(t));
    int l = n - 1;
    while (l >= 0) {
      if (++t[l] < hi[l]) break;
      t[l] = w.origin[l];
      --l;
    }
    if (l < 0) return;
  }
}

/// Finite rectangular real field over Z^N with explicit origin. All values finite.
class LatticeField {
 public:
  LatticeField() = default;
  /// Zero-filled field on `window`.
  explicit LatticeField(Window window);
  LatticeField(Window window, std::vector<double> values);

  template <class Fn>
  static LatticeField generate(const Window& window, Fn&& fn) {
    std::vector<double> v;
    v.reserve(window.volume());
    for_each_point(window, [&](const MultiIndex& t) { v.push_back(fn(t)); });
    return LatticeField(window, std::move(v));
  }

  int dim() const noexcept { return window_.dim(); }
  const Window& window() const noexcept { return window_; }
  bool contains(const MultiIndex& t) const noexcept { return window_.contains(t); }

  /// Throws OutOfWindow when t is outside the window.
  double get(const MultiIndex& t) const;
  double operator()(const MultiIndex& t) const noexcept { return values_[window_.offset_of(t)]; }
  /// Throws OutOfWindow or NonFiniteValue.
  void set(const MultiIndex& t, double v);

  std::span<const double> values() const noexcept { return values_; }
  double max_abs() const noexcept;

  friend bool operator==(const LatticeField& a, const LatticeField& b) noexcept = default;

 private:
  Window window_;
  std::vector<double> values_;
};

/// g.get(t + s) == f.get(t); values untouched.
LatticeField translate(const LatticeField& f, const MultiIndex& s);

/// Copy of the values of f restricted to `sub` (must lie inside f's window).
LatticeField restrict_to(const LatticeField& f, const Window& sub);

struct Corner {
  MultiIndex offset;  // i in {0,1}^N
  int sign;           // (-1)^{sum i}
  int weight;         // sum i
};

/// All 2^N corners of the unit cell in lexicographic order (last coordinate fastest).
const std::vector<Corner>& corner_signs(int n);

/// max over t in w of |<t, Theta>|; attained at a corner of the window.
double max_abs_dot(const ThetaVector& theta, const Window& w);

/// Neumaier-compensated accumulator; fixed summation order gives reproducible totals.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace latfield
