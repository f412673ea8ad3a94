#include "latfield/lattice.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <sstream>

namespace latfield {

void check_dimension(int n) {
  if (n < 1 || n > kMaxDim) {
    throw LatticeError(ErrorKind::UnsupportedDimension,
                       "dimension " + std::to_string(n) + " outside [1, " + std::to_string(kMaxDim) + "]");
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw LatticeError(ErrorKind::DimensionMismatch,
                       std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

MultiIndex::MultiIndex(int n) : n_(n) { check_dimension(n); }

MultiIndex::MultiIndex(std::initializer_list<std::int64_t> coords)
    : MultiIndex(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

MultiIndex::MultiIndex(std::span<const std::int64_t> coords) : n_(static_cast<int>(coords.size())) {
  check_dimension(n_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

MultiIndex MultiIndex::filled(int n, std::int64_t value) {
  MultiIndex m(n);
  for (int l = 0; l < n; ++l) m[l] = value;
  return m;
}

MultiIndex MultiIndex::unit(int n, int axis) {
  MultiIndex m(n);
  m[axis] = 1;
  return m;
}

std::int64_t MultiIndex::sum() const noexcept {
  std::int64_t s = 0;
  for (int l = 0; l < n_; ++l) s += c_[static_cast<std::size_t>(l)];
  return s;
}

MultiIndex& MultiIndex::operator+=(const MultiIndex& o) {
  require_same_dim(n_, o.n_, "MultiIndex addition");
  for (int l = 0; l < n_; ++l) c_[static_cast<std::size_t>(l)] += o[l];
  return *this;
}

MultiIndex& MultiIndex::operator-=(const MultiIndex& o) {
  require_same_dim(n_, o.n_, "MultiIndex subtraction");
  for (int l = 0; l < n_; ++l) c_[static_cast<std::size_t>(l)] -= o[l];
  return *this;
}

MultiIndex operator-(MultiIndex a) {
  for (int l = 0; l < a.n_; ++l) a[l] = -a[l];
  return a;
}

bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept {
  if (a.n_ != b.n_) return false;
  for (int l = 0; l < a.n_; ++l) {
    if (a[l] != b[l]) return false;
  }
  return true;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int l = 0; l < n_; ++l) {
    if (l) os << ',';
    os << c_[static_cast<std::size_t>(l)];
  }
  os << ')';
  return os.str();
}

bool all_leq(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a.size(), b.size(), "componentwise comparison");
  for (int l = 0; l < a.size(); ++l) {
    if (a[l] > b[l]) return false;
  }
  return true;
}

bool all_less(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a.size(), b.size(), "componentwise comparison");
  for (int l = 0; l < a.size(); ++l) {
    if (a[l] >= b[l]) return false;
  }
  return true;
}

ThetaVector::ThetaVector(std::vector<double> thetas) : thetas_(std::move(thetas)) {
  check_dimension(size());
  for (std::size_t l = 0; l < thetas_.size(); ++l) {
    if (!(thetas_[l] > 0.0) || !std::isfinite(thetas_[l])) {
      std::ostringstream os;
      os << "theta components must be strictly positive and finite (theta_" << l + 1 << " = " << thetas_[l] << ")";
      throw LatticeError(ErrorKind::InvalidArgument, os.str());
    }
  }
}

double ThetaVector::min_theta() const noexcept { return *std::min_element(thetas_.begin(), thetas_.end()); }

double ThetaVector::dot(const MultiIndex& t) const {
  require_same_dim(size(), t.size(), "theta vs index");
  double s = 0.0;
  for (int l = 0; l < size(); ++l) s += static_cast<double>(t[l]) * thetas_[static_cast<std::size_t>(l)];
  return s;
}

Window::Window(MultiIndex origin_, MultiIndex extents_) : origin(origin_), extents(extents_) {
  require_same_dim(origin.size(), extents.size(), "window origin vs extents");
  for (int l = 0; l < extents.size(); ++l) {
    if (extents[l] < 1) {
      throw LatticeError(ErrorKind::InvalidArgument, "window extents must be positive, got " + extents.to_string());
    }
  }
}

Window Window::from_bounds(const MultiIndex& lo, const MultiIndex& hi_exclusive) {
  return Window(lo, hi_exclusive - lo);
}

std::size_t Window::volume() const noexcept {
  if (origin.size() == 0) return 0;
  std::size_t v = 1;
  for (int l = 0; l < extents.size(); ++l) v *= static_cast<std::size_t>(extents[l]);
  return v;
}

bool Window::contains(const MultiIndex& t) const noexcept {
  if (t.size() != origin.size() || origin.size() == 0) return false;
  for (int l = 0; l < t.size(); ++l) {
    if (t[l] < origin[l] || t[l] >= origin[l] + extents[l]) return false;
  }
  return true;
}

bool Window::contains(const Window& w) const noexcept {
  if (w.dim() != dim() || dim() == 0) return false;
  for (int l = 0; l < dim(); ++l) {
    if (w.origin[l] < origin[l] || w.origin[l] + w.extents[l] > origin[l] + extents[l]) return false;
  }
  return true;
}

std::size_t Window::offset_of(const MultiIndex& t) const noexcept {
  std::size_t off = 0;
  for (int l = 0; l < origin.size(); ++l) {
    off = off * static_cast<std::size_t>(extents[l]) + static_cast<std::size_t>(t[l] - origin[l]);
  }
  return off;
}

MultiIndex Window::point_at(std::size_t offset) const {
  MultiIndex t = origin;
  for (int l = origin.size() - 1; l >= 0; --l) {
    const auto e = static_cast<std::size_t>(extents[l]);
    t[l] = origin[l] + static_cast<std::int64_t>(offset % e);
    offset /= e;
  }
  return t;
}

Window Window::hull(const Window& w) const {
  require_same_dim(dim(), w.dim(), "window hull");
  MultiIndex lo = origin, hi = this->hi();
  const MultiIndex whi = w.hi();
  for (int l = 0; l < dim(); ++l) {
    lo[l] = std::min(lo[l], w.origin[l]);
    hi[l] = std::max(hi[l], whi[l]);
  }
  return from_bounds(lo, hi);
}

std::string Window::to_string() const {
  std::ostringstream os;
  const MultiIndex h = hi();
  os << '[';
  for (int l = 0; l < dim(); ++l) {
    if (l) os << ',';
    os << origin[l] << ':' << h[l];
  }
  os << ')';
  return os.str();
}

LatticeField::LatticeField(Window window) : window_(std::move(window)), values_(window_.volume(), 0.0) {}

LatticeField::LatticeField(Window window, std::vector<double> values)
    : window_(std::move(window)), values_(std::move(values)) {
  if (values_.size() != window_.volume()) {
    throw LatticeError(ErrorKind::InvalidArgument, "value count " + std::to_string(values_.size()) +
                                                       " does not match window volume " +
                                                       std::to_string(window_.volume()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw LatticeError(ErrorKind::NonFiniteValue,
                         "non-finite value at " + window_.point_at(k).to_string());
    }
  }
}

double LatticeField::get(const MultiIndex& t) const {
  if (!window_.contains(t)) {
    throw LatticeError(ErrorKind::OutOfWindow, t.to_string() + " outside " + window_.to_string());
  }
  return values_[window_.offset_of(t)];
}

void LatticeField::set(const MultiIndex& t, double v) {
  if (!window_.contains(t)) {
    throw LatticeError(ErrorKind::OutOfWindow, t.to_string() + " outside " + window_.to_string());
  }
  if (!std::isfinite(v)) throw LatticeError(ErrorKind::NonFiniteValue, "non-finite value at " + t.to_string());
  values_[window_.offset_of(t)] = v;
}

double LatticeField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

LatticeField translate(const LatticeField& f, const MultiIndex& s) {
  require_same_dim(f.dim(), s.size(), "translate");
  return LatticeField(f.window().shifted(s), std::vector<double>(f.values().begin(), f.values().end()));
}

LatticeField restrict_to(const LatticeField& f, const Window& sub) {
  if (!f.window().contains(sub)) {
    throw LatticeError(ErrorKind::OutOfWindow, sub.to_string() + " not inside " + f.window().to_string());
  }
  return LatticeField::generate(sub, [&](const MultiIndex& t) { return f(t); });
}

const std::vector<Corner>& corner_signs(int n) {
  check_dimension(n);
  static std::array<std::vector<Corner>, kMaxDim + 1> cache;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int d = 1; d <= kMaxDim; ++d) {
      auto& list = cache[static_cast<std::size_t>(d)];
      const unsigned count = 1u << d;
      list.reserve(count);
      for (unsigned bits = 0; bits < count; ++bits) {
        MultiIndex i(d);
        int w = 0;
        for (int l = 0; l < d; ++l) {
          // most significant bit is axis 0 so the order is lexicographic
          const unsigned b = (bits >> (d - 1 - l)) & 1u;
          i[l] = b;
          w += static_cast<int>(b);
        }
        list.push_back(Corner{i, (w % 2 == 0) ? 1 : -1, w});
      }
    }
  });
  return cache[static_cast<std::size_t>(n)];
}

double max_abs_dot(const ThetaVector& theta, const Window& w) {
  require_same_dim(theta.size(), w.dim(), "theta vs window");
  double m = 0.0;
  const MultiIndex hi = w.hi();
  for (const auto& c : corner_signs(w.dim())) {
    double s = 0.0;
    for (int l = 0; l < w.dim(); ++l) {
      const auto coord = c.offset[l] ? hi[l] - 1 : w.origin[l];
      s += static_cast<double>(coord) * theta[l];
    }
    m = std::max(m, std::fabs(s));
  }
  return m;
}

}  // namespace latfield
