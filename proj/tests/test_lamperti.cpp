#include "doctest.h"

#include <cmath>
#include <random>

#include "latfield/gaussian.hpp"
#include "latfield/lamperti.hpp"

using namespace latfield;

TEST_CASE("forward transform values") {
  const LatticeField one = LatticeField::generate(Window({0}, {5}), [](const MultiIndex&) { return 1.0; });
  const SelfSimilarField y = lamperti_forward(one, ThetaVector{1.0});
  CHECK(y.inner.get({3}) == doctest::Approx(20.085536923187668).epsilon(1e-15));
  CHECK(y.inner.get({0}) == 1.0);

  const SelfSimilarField z = lamperti_forward(LatticeField(Window({-2, 1}, {3, 3})), ThetaVector{0.4, 2.0});
  for (double v : z.inner.values()) CHECK(v == 0.0);
}

TEST_CASE("integer-log rates give exact multipliers") {
  const LatticeField one = LatticeField::generate(Window({-4, -2}, {8, 5}), [](const MultiIndex&) { return 1.0; });
  const ThetaVector th{std::log(2.0), std::log(3.0)};
  const SelfSimilarField y = lamperti_forward(one, th);
  CHECK(std::fabs(y.inner.get({2, 1}) - 12.0) <= 2 * 12.0 * 2.220446049250313e-16);

  const LatticeField c = LatticeField::generate(Window({-3}, {4}), [](const MultiIndex&) { return 1.0; });
  const SelfSimilarField yc{c, ThetaVector{std::log(2.0)}};
  const LatticeField x = lamperti_inverse(yc);
  CHECK(std::fabs(x.get({-3}) - 8.0) <= 2 * 8.0 * 2.220446049250313e-16);
  CHECK(x.get({0}) == 1.0);
}

TEST_CASE("round trip on |<t,Theta>| <= 30 is exact to 1e-12") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> t(static_cast<std::size_t>(n));
      for (auto& v : t) v = u(gen);
      const ThetaVector th(t);
      double sum_theta = 0;
      for (double v : t) sum_theta += v;
      const std::int64_t r = std::max<std::int64_t>(1, static_cast<std::int64_t>(30.0 / sum_theta));
      const Window w(MultiIndex::filled(n, -r), MultiIndex::filled(n, 2 * r + 1));
      const auto x = LatticeField::generate(w, [&](const MultiIndex&) { return nd(gen); });
      const LatticeField back = lamperti_inverse(lamperti_forward(x, th));
      for_each_point(w, [&](const MultiIndex& p) { worst = std::max(worst, std::fabs(back(p) - x(p)) / std::fabs(x(p))); });

      const auto yv = LatticeField::generate(w, [&](const MultiIndex&) { return nd(gen); });
      const SelfSimilarField again = lamperti_forward(lamperti_inverse(SelfSimilarField{yv, th}), th);
      for_each_point(w, [&](const MultiIndex& p) { worst = std::max(worst, std::fabs(again.inner(p) - yv(p)) / std::fabs(yv(p))); });
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("overflow guard") {
  const LatticeField x(Window({0}, {3}));
  try {
    lamperti_forward(x, ThetaVector{400.0});
    FAIL("expected OverflowGuard");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::OverflowGuard);
  }
  CHECK_THROWS_AS(lamperti_forward(x, ThetaVector{1.0, 1.0}), LatticeError);
}

TEST_CASE("scaling check: zero shift and a sheet ensemble") {
  const GaussianSpec spec{{0.5, 0.5}, 1.0};
  const SelfSimilarSheetGenerator gen(spec, ThetaVector{1.0, 1.0}, Window({-1, -1}, {3, 3}));
  std::vector<SelfSimilarField> s(10000);
  for (std::size_t r = 0; r < s.size(); ++r) s[r] = gen.draw(5, r);

  const TestReport zero = selfsimilar_scaling_check(s, MultiIndex{0, 0});
  CHECK(zero.pass);
  CHECK(zero.max_abs_z == 0.0);

  const TestReport ok = selfsimilar_scaling_check(s, MultiIndex{1, 0}, 4.0);
  CHECK(ok.pass);

  // Claiming twice the true exponent makes the second moments disagree.
  std::vector<SelfSimilarField> wrong = s;
  for (auto& w : wrong) w.theta = ThetaVector{1.0, 1.0};
  const TestReport bad = selfsimilar_scaling_check(wrong, MultiIndex{1, 0});
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_abs_z > 20.0);

  CHECK_THROWS_AS(selfsimilar_scaling_check(std::span(s).first(50), MultiIndex{1, 0}), LatticeError);
}
