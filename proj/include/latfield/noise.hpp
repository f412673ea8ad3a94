#pragma once

#include <optional>
#include <span>
#include <vector>

#include "latfield/lamperti.hpp"
#include "latfield/lattice.hpp"
#include "latfield/operators.hpp"

namespace latfield {

/// True when sum(t) lies in {0, -1, ..., -N+1}: the N diagonal hyperplanes on which
/// members of the noise class vanish.
bool on_zero_plane(const MultiIndex& t) noexcept;

/// A stationary-increment driving field that is exactly zero on the zero planes.
struct NoiseField {
  LatticeField inner;
  ThetaVector theta;

  /// Validates the zero-plane pinning (bit-exact) and dimensions.
  static NoiseField checked(LatticeField field, ThetaVector theta);
};

enum class Membership { PositiveBranch, NegativeBranch, Excluded };

/// Whether the term indexed by j contributes to the nested sum defining G_t:
///   positive: j <= t componentwise and sum(j) >= 1,
///   negative: j >= t + 1 componentwise and sum(j) <= 0.
Membership term_membership(const MultiIndex& t, const MultiIndex& j);

/// Bounding box of all term indices j used by G_t over t in `out`. Empty when every
/// point of `out` sits on a zero plane (all sums empty).
std::optional<Window> term_index_window(const Window& out);

/// Window of the self-similar source needed by construct_g over `out`: the term box
/// extended by one on the low side (each term needs a full unit cell of Y).
std::optional<Window> required_source_window(const Window& out);

/// Explicit G built from a self-similar field by the diagonal nested sums:
///   sum(t) >= 1 : sum_{k_1 = 1 - t_2 - ... - t_N}^{t_1} ... sum_{k_N = 1 - k_1 - ... - k_{N-1}}^{t_N}
///   sum(t) <= 0 : (-1)^N sum_{k_1 = t_1 + 1}^{-t_2 - ... - t_N - N + 1} ... sum_{k_N = t_N + 1}^{-k_1 - ... - k_{N-1}}
/// of e^{-<k,Theta>} Delta_k Y, with reversed bounds meaning an empty sum.
NoiseField construct_g(const SelfSimilarField& y, const Window& window);

/// Brute-force G_t: scans every available term index and keeps those accepted by
/// term_membership. Independent of the nested-bound evaluation in construct_g.
double construct_g_oracle(const SelfSimilarField& y, const MultiIndex& t);

/// Exact-integer check of the even/odd binomial half-sum identities for 1 <= M <= 60.
bool binomial_identity_check(int m);

/// Rebuilds G on `out` from its square increments and the zero-plane boundary by
/// sweeping diagonals outward (sum = 1, 2, ... then sum = -N, -N-1, ...).
/// Throws IncompleteCoverage naming the first increment that blocks a requested point.
NoiseField integrate_increments(const IncrementField& delta, const ThetaVector& theta, const Window& out);

/// Increment cells that integrate_increments needs to reach every point of `out`.
std::optional<Window> required_increment_window(const Window& out);

/// S_M = sum_{t - M <= j <= t} e^{<j,Theta>} Delta_j G, with the iterated sums nested in
/// `axis_order` (outermost first). Any permutation gives the same value up to rounding.
double truncated_weighted_sum(const NoiseField& g, const MultiIndex& t, int depth,
                              std::span<const int> axis_order = {});

struct MembershipReport {
  MultiIndex point;
  std::vector<int> depths;
  std::vector<double> partial_sums;
  std::vector<double> differences;  // |S_{M_{k+1}} - S_{M_k}|
  double fitted_rate = 0.0;         // per-unit-depth geometric rate from a log-linear fit
  double expected_rate = 0.0;       // e^{-min theta}
  double envelope_growth = 0.0;     // late/early ratio of differences normalised by e^{-M min theta}
  bool pass = true;
};

/// Numerical convergence diagnostic for the weighted increment series. Passes when the
/// differences follow the e^{-M min theta} envelope to within a factor 10.
MembershipReport class_membership_check(const NoiseField& g, const MultiIndex& t, std::span<const int> depths);

}  // namespace latfield
