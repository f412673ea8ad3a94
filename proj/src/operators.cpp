#include "latfield/operators.hpp"

namespace latfield {

namespace {

void require_cell(const LatticeField& f, const MultiIndex& t) {
  require_same_dim(f.dim(), t.size(), "stencil point");
  for (const auto& c : corner_signs(t.size())) {
    const MultiIndex p = t - c.offset;
    if (!f.contains(p)) {
      throw LatticeError(ErrorKind::OutOfWindow,
                         "corner " + p.to_string() + " of cell at " + t.to_string() + " outside " +
                             f.window().to_string());
    }
  }
}

}  // namespace

double square_increment(const LatticeField& f, const MultiIndex& t) {
  require_cell(f, t);
  CompensatedSum acc;
  for (const auto& c : corner_signs(t.size())) acc += c.sign * f(t - c.offset);
  return acc.value();
}

IncrementField increment_field(const LatticeField& f) {
  const Window& w = f.window();
  for (int l = 0; l < w.dim(); ++l) {
    if (w.extents[l] < 2) {
      throw LatticeError(ErrorKind::WindowTooSmall,
                         "increment field needs extent >= 2 on every axis, got " + w.extents.to_string());
    }
  }
  const MultiIndex one = MultiIndex::filled(w.dim(), 1);
  const Window inner(w.origin + one, w.extents - one);
  const auto& corners = corner_signs(w.dim());
  return IncrementField{LatticeField::generate(inner, [&](const MultiIndex& t) {
    CompensatedSum acc;
    for (const auto& c : corners) acc += c.sign * f(t - c.offset);
    return acc.value();
  })};
}

double previous_value(const LatticeField& f, const MultiIndex& t) {
  require_cell(f, t);
  const auto& corners = corner_signs(t.size());
  CompensatedSum acc;
  for (std::size_t k = 1; k < corners.size(); ++k) acc += -corners[k].sign * f(t - corners[k].offset);
  return acc.value();
}

ThetaStencil::ThetaStencil(const ThetaVector& theta) : theta_(theta) {
  const auto& corners = corner_signs(theta.size());
  weights_.resize(corners.size(), 0.0);
  for (std::size_t k = 1; k < corners.size(); ++k) {
    weights_[k] = -corners[k].sign * std::exp(-theta.dot(corners[k].offset));
  }
}

double ThetaStencil::apply(const LatticeField& f, const MultiIndex& t) const {
  require_same_dim(theta_.size(), f.dim(), "theta vs field");
  require_cell(f, t);
  const auto& corners = corner_signs(t.size());
  CompensatedSum acc;
  for (std::size_t k = 1; k < corners.size(); ++k) acc += weights_[k] * f(t - corners[k].offset);
  return acc.value();
}

double ThetaStencil::abs_weight_sum() const noexcept {
  double s = 0.0;
  for (double w : weights_) s += std::fabs(w);
  return s;
}

double theta_inner_product(const ThetaVector& theta, const LatticeField& f, const MultiIndex& t) {
  return ThetaStencil(theta).apply(f, t);
}

double rectangular_increment(const LatticeField& f, const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a.size(), b.size(), "box corners");
  require_same_dim(f.dim(), a.size(), "box vs field");
  for (int l = 0; l < a.size(); ++l) {
    if (a[l] >= b[l]) {
      throw LatticeError(ErrorKind::DegenerateBox, "box " + a.to_string() + "-" + b.to_string() +
                                                       " is degenerate along axis " + std::to_string(l + 1));
    }
  }
  const auto& corners = corner_signs(a.size());
  for (const auto& c : corners) {
    MultiIndex p = b;
    for (int l = 0; l < a.size(); ++l) {
      if (c.offset[l]) p[l] = a[l];
    }
    if (!f.contains(p)) {
      throw LatticeError(ErrorKind::OutOfWindow,
                         "box corner " + p.to_string() + " outside " + f.window().to_string());
    }
  }
  CompensatedSum acc;
  for (const auto& c : corners) {
    MultiIndex p = b;
    for (int l = 0; l < a.size(); ++l) {
      if (c.offset[l]) p[l] = a[l];
    }
    acc += c.sign * f(p);
  }
  return acc.value();
}

}  // namespace latfield
