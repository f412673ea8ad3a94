#include "doctest.h"

#include <cmath>
#include <random>

#include "latfield/noise.hpp"

using namespace latfield;

namespace {

double y2(const MultiIndex& t) {
  const double a = double(t[0]), b = double(t[1]);
  return std::cos(0.7 * a + 0.3) + 0.5 * std::sin(1.1 * b - 0.2) + 0.1 * a * b;
}

double y3(const MultiIndex& t) {
  const double a = double(t[0]), b = double(t[1]), c = double(t[2]);
  return std::cos(0.4 * a - 0.9 * b + 0.25 * c) + 0.2 * c;
}

template <class Fn>
SelfSimilarField source_for(const Window& out, const ThetaVector& th, Fn&& fn) {
  const Window src = *required_source_window(out);
  return SelfSimilarField{LatticeField::generate(src, fn), th};
}

SelfSimilarField random_source(const Window& out, const ThetaVector& th, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  return source_for(out, th, [&](const MultiIndex&) { return nd(gen); });
}

}  // namespace

TEST_CASE("zero planes") {
  CHECK(on_zero_plane({0, 0}));
  CHECK(on_zero_plane({2, -3}));
  CHECK_FALSE(on_zero_plane({-2, 0}));
  CHECK_FALSE(on_zero_plane({1, 0}));
  CHECK(on_zero_plane({1, -1, -2}));
  CHECK_FALSE(on_zero_plane({1, -1, -3}));
  CHECK(on_zero_plane(MultiIndex{0}));
  CHECK_FALSE(on_zero_plane(MultiIndex{-1}));
}

TEST_CASE("term membership") {
  CHECK(term_membership({1, 0}, {1, 0}) == Membership::PositiveBranch);
  CHECK(term_membership({-2, -1}, {-1, 0}) == Membership::NegativeBranch);
  CHECK(term_membership({1, 0}, {2, 0}) == Membership::Excluded);
  CHECK(term_membership({1, 0}, {0, 0}) == Membership::Excluded);
  CHECK_THROWS_AS(term_membership({1, 0}, MultiIndex{1}), LatticeError);
}

TEST_CASE("explicit G against literal nested sums (N=2)") {
  const ThetaVector th{0.6, 1.3};
  const Window out({-3, -4}, {8, 8});
  const SelfSimilarField y = source_for(out, th, y2);
  const NoiseField g = construct_g(y, out);
  struct Ref {
    MultiIndex t;
    double v;
  };
  const Ref refs[] = {
      {{1, 0}, 0.054881163609402643263},  {{2, 1}, 0.2459362176962422605},   {{3, 3}, 0.59316833331192381764},
      {{0, 2}, 0.048214065448495917544},  {{-2, -1}, 0.33187041041819184896}, {{-3, 0}, 0.16480196857689755648},
      {{-1, -4}, 13.115203313949528145},  {{1, -1}, 0.0},                    {{4, -2}, 0.79286327569907022611},
  };
  for (const auto& r : refs) {
    const double tol = 1e-13 * std::max(1.0, std::fabs(r.v));
    CHECK(std::fabs(g.inner.get(r.t) - r.v) <= tol);
    CHECK(std::fabs(construct_g_oracle(y, r.t) - r.v) <= tol);
  }
  // Only k = (1,0) contributes at t = (1,0).
  const double single = std::exp(-0.6) * (y2({1, 0}) - y2({0, 0}) - y2({1, -1}) + y2({0, -1}));
  CHECK(g.inner.get({1, 0}) == doctest::Approx(single).epsilon(1e-14));
  CHECK(g.inner.get({-1, 0}) == 0.0);
}

TEST_CASE("explicit G against literal nested sums (N=3)") {
  const ThetaVector th{0.5, 0.9, 1.7};
  const Window out({-2, -2, -2}, {5, 5, 5});
  const SelfSimilarField y = source_for(out, th, y3);
  const NoiseField g = construct_g(y, out);
  struct Ref {
    MultiIndex t;
    double v;
  };
  const Ref refs[] = {
      {{1, 0, 0}, -0.026201683693581312676},   {{2, 1, -1}, 0.15201429850802845584},
      {{1, 1, 1}, 0.050485133486401802292},    {{-2, -1, 0}, -0.00064892648568112705225},
      {{-1, -1, -2}, -0.13431953758090348965}, {{0, 0, -1}, 0.0},
  };
  for (const auto& r : refs) {
    const double tol = 1e-13 * std::max(1.0, std::fabs(r.v));
    CHECK(std::fabs(g.inner.get(r.t) - r.v) <= tol);
    CHECK(std::fabs(construct_g_oracle(y, r.t) - r.v) <= tol);
  }
}

TEST_CASE("G properties: zero planes, increments, oracle agreement") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int n = 1; n <= 3; ++n) {
    const std::int64_t ext = n == 3 ? 5 : 7;
    const Window out(MultiIndex::filled(n, -ext / 2 - 1), MultiIndex::filled(n, ext));
    std::vector<double> tv(static_cast<std::size_t>(n));
    for (auto& v : tv) v = u(gen);
    const ThetaVector th(tv);
    const SelfSimilarField y = random_source(out, th, 100 + unsigned(n));
    const NoiseField g = construct_g(y, out);
    const double scale = std::max(1.0, y.inner.max_abs());
    int zero_fail = 0;
    double diff = 0.0, oracle = 0.0;
    for_each_point(out, [&](const MultiIndex& t) {
      if (on_zero_plane(t) && g.inner(t) != 0.0) ++zero_fail;
      oracle = std::max(oracle, std::fabs(g.inner(t) - construct_g_oracle(y, t)));
      if (all_less(out.lo(), t)) {
        diff = std::max(diff, std::fabs(square_increment(g.inner, t) - std::exp(-th.dot(t)) * square_increment(y.inner, t)));
      }
    });
    CHECK(zero_fail == 0);
    CHECK(diff <= 1e-10 * scale);
    CHECK(oracle <= 1e-12 * scale);
  }
}

TEST_CASE("source window too small") {
  const ThetaVector th{1.0, 1.0};
  const Window out({0, 0}, {4, 4});
  const SelfSimilarField small{LatticeField(Window({0, 0}, {4, 4})), th};
  try {
    construct_g(small, out);
    FAIL("expected SourceWindowTooSmall");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::SourceWindowTooSmall);
  }
  CHECK_THROWS_AS(construct_g(SelfSimilarField{LatticeField(Window({0}, {4})), ThetaVector{1.0}}, out), LatticeError);
}

TEST_CASE("noise field rejects nonzero values on the zero planes") {
  LatticeField f(Window({-1, -1}, {3, 3}));
  f.set({1, -1}, 1e-300);
  try {
    NoiseField::checked(f, ThetaVector{1.0, 1.0});
    FAIL("expected ZeroPlaneViolation");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::ZeroPlaneViolation);
  }
}

TEST_CASE("binomial identities") {
  for (int m = 1; m <= 60; ++m) CHECK(binomial_identity_check(m));
  CHECK_THROWS_AS(binomial_identity_check(0), LatticeError);
  CHECK_THROWS_AS(binomial_identity_check(61), LatticeError);
}

TEST_CASE("integrate increments") {
  SUBCASE("zero increments give zero") {
    const IncrementField d{LatticeField(Window({-4, -4}, {9, 9}))};
    const Window out({-3, -3}, {6, 6});
    const NoiseField g = integrate_increments(d, ThetaVector{1.0, 2.0}, out);
    for (double v : g.inner.values()) CHECK(v == 0.0);
  }
  SUBCASE("N=1 cumulative sum") {
    const IncrementField d{LatticeField::generate(Window({-9}, {20}), [](const MultiIndex&) { return 1.0; })};
    const NoiseField g = integrate_increments(d, ThetaVector{0.37}, Window({-8}, {17}));
    for_each_point(g.inner.window(), [&](const MultiIndex& t) { CHECK(g.inner(t) == double(t[0])); });
  }
  SUBCASE("round trip through construct_g") {
    for (int n = 1; n <= 3; ++n) {
      const Window out(MultiIndex::filled(n, -3), MultiIndex::filled(n, 6));
      const ThetaVector th(std::vector<double>(static_cast<std::size_t>(n), 0.8));
      const SelfSimilarField y = random_source(out, th, 40 + unsigned(n));
      const Window wide = *required_increment_window(out);
      const Window g_window(wide.origin - MultiIndex::filled(n, 1), wide.extents + MultiIndex::filled(n, 1));
      const NoiseField g0 = construct_g(SelfSimilarField{LatticeField::generate(*required_source_window(g_window),
                                                                                [&](const MultiIndex& t) {
                                                                                  return y.inner.contains(t) ? y.inner(t) : 0.25 * double(t.sum());
                                                                                }),
                                                         th},
                                        g_window);
      const NoiseField back = integrate_increments(increment_field(g0.inner), th, out);
      const double scale = std::max(1.0, g0.inner.max_abs());
      double worst = 0.0;
      for_each_point(out, [&](const MultiIndex& t) { worst = std::max(worst, std::fabs(back.inner(t) - g0.inner(t))); });
      CHECK(worst <= 1e-10 * scale);
    }
  }
  SUBCASE("missing increments are reported") {
    const IncrementField d{LatticeField(Window({1, 1}, {2, 2}))};
    try {
      integrate_increments(d, ThetaVector{1.0, 1.0}, Window({0, 0}, {5, 5}));
      FAIL("expected IncompleteCoverage");
    } catch (const LatticeError& e) {
      CHECK(e.kind() == ErrorKind::IncompleteCoverage);
    }
  }
}

TEST_CASE("truncated sum is independent of the axis order") {
  const ThetaVector th{0.7, 1.1, 0.5};
  const Window out({-12, -12, -12}, {16, 16, 16});
  const SelfSimilarField y = random_source(out, th, 9);
  const NoiseField g = construct_g(y, out);
  const MultiIndex t{2, 1, 3};
  int perm[] = {0, 1, 2};
  const double ref = truncated_weighted_sum(g, t, 10);
  const double scale = std::max(1.0, std::fabs(ref));
  do {
    CHECK(std::fabs(truncated_weighted_sum(g, t, 10, perm) - ref) <= 1e-12 * scale);
  } while (std::next_permutation(perm, perm + 3));
}

TEST_CASE("membership check") {
  const NoiseField zero{LatticeField(Window({-30, -30}, {32, 32})), ThetaVector{1.0, 1.0}};
  const int depths[] = {5, 10, 20};
  const MembershipReport r0 = class_membership_check(zero, {1, 1}, depths);
  CHECK(r0.pass);
  for (double s : r0.partial_sums) CHECK(s == 0.0);

  // Bounded stationary increments: the weighted terms decay like e^{<j,Theta>}.
  const ThetaVector th{0.8, 1.2};
  const Window out({-40, -40}, {42, 42});
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  const IncrementField d{LatticeField::generate(*required_increment_window(out), [&](const MultiIndex&) { return nd(gen); })};
  const NoiseField g = integrate_increments(d, th, out);
  const MembershipReport r = class_membership_check(g, {1, 1}, depths);
  CHECK(r.pass);
  CHECK(r.expected_rate == doctest::Approx(std::exp(-0.8)));

  // construct_g of an i.i.d. source has weighted terms Delta_j Y that never decay.
  const NoiseField wild = construct_g(random_source(out, th, 3), out);
  const int more[] = {5, 10, 15, 20, 25, 30};
  CHECK_FALSE(class_membership_check(wild, {1, 1}, more).pass);

  const int too_deep[] = {5, 50};
  CHECK_THROWS_AS(class_membership_check(g, {1, 1}, too_deep), LatticeError);
}
