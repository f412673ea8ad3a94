#pragma once

#include <vector>

#include "latfield/lattice.hpp"

namespace latfield {

/// Values of the square increment of some source field. The window is the
/// source window with its low face removed along every axis.
struct IncrementField {
  LatticeField inner;
};

/// Alternating corner sum over the unit cell {t - i : i in {0,1}^N}.
double square_increment(const LatticeField& f, const MultiIndex& t);

/// square_increment at every point whose unit cell lies inside f.
IncrementField increment_field(const LatticeField& f);

/// X_t^- = X_t - Delta_t X, evaluated from the 2^N - 1 lower neighbours only.
double previous_value(const LatticeField& f, const MultiIndex& t);

/// Precomputed weights (-1)^{1+|i|} e^{-<i,Theta>} over the nonzero corners.
class ThetaStencil {
 public:
  explicit ThetaStencil(const ThetaVector& theta);

  const ThetaVector& theta() const noexcept { return theta_; }
  /// <Theta-hat, X-hat_t^->
  double apply(const LatticeField& f, const MultiIndex& t) const;
  /// Sum of |weights|; bounds the operator norm of the map in sup norm.
  double abs_weight_sum() const noexcept;

 private:
  ThetaVector theta_;
  std::vector<double> weights_;  // indexed like corner_signs(n), weights_[0] unused
};

double theta_inner_product(const ThetaVector& theta, const LatticeField& f, const MultiIndex& t);

/// Alternating corner sum over the box with opposite corners a < b.
/// Equals the sum of square_increment over all unit cells c with a < c <= b.
double rectangular_increment(const LatticeField& f, const MultiIndex& a, const MultiIndex& b);

}  // namespace latfield
