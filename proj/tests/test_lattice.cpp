#include "doctest.h"

#include <random>

#include "latfield/lattice.hpp"

using namespace latfield;

TEST_CASE("field_get reads stored values") {
  LatticeField f(Window({0, 0}, {3, 4}));
  f.set({1, 2}, 3.5);
  CHECK(f.get({1, 2}) == 3.5);

  LatticeField g(Window({2, -1}, {2, 2}), {7.0, 8.0, 9.0, 10.0});
  CHECK(g.get({2, -1}) == 7.0);
}

TEST_CASE("2x2 row-major layout with negative origin") {
  // Enumerated by hand: (-1,-1)->a, (-1,0)->b, (0,-1)->c, (0,0)->d.
  LatticeField f(Window({-1, -1}, {2, 2}), {1.0, 2.0, 3.0, 4.0});
  CHECK(f.get({0, 0}) == 4.0);
  CHECK(f.get({-1, 0}) == 2.0);
  CHECK(f.get({0, -1}) == 3.0);
}

TEST_CASE("out-of-window access and non-finite values are rejected") {
  LatticeField f(Window({0, 0}, {2, 2}));
  CHECK_THROWS_AS(f.get({2, 0}), LatticeError);
  try {
    f.get({-1, 0});
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::OutOfWindow);
  }
  try {
    f.set({0, 0}, std::nan(""));
    FAIL("expected NonFiniteValue");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteValue);
  }
  try {
    LatticeField bad(Window({0}, {2}), {1.0, INFINITY});
    FAIL("expected NonFiniteValue");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteValue);
  }
  CHECK_THROWS_AS(LatticeField(Window({0}, {3}), {1.0, 2.0}), LatticeError);
}

TEST_CASE("set/get round trip is exact") {
  std::mt19937_64 gen(3);
  LatticeField f(Window({-3, 5, 0}, {4, 2, 3}));
  std::uniform_real_distribution<double> u(-1e300, 1e300);
  for_each_point(f.window(), [&](const MultiIndex& t) {
    const double v = u(gen);
    f.set(t, v);
    CHECK(f.get(t) == v);
  });
}

TEST_CASE("dimension limits") {
  CHECK_THROWS_AS(MultiIndex(0), LatticeError);
  CHECK_THROWS_AS(MultiIndex(9), LatticeError);
  CHECK_NOTHROW(MultiIndex(8));
  try {
    corner_signs(9);
    FAIL("expected UnsupportedDimension");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedDimension);
  }
}

TEST_CASE("componentwise ordering requires equal dimensions") {
  CHECK(all_leq({1, 2}, {1, 3}));
  CHECK_FALSE(all_less({1, 2}, {1, 3}));
  CHECK(all_less({0, 2}, {1, 3}));
  try {
    all_leq({1}, {1, 2});
    FAIL("expected DimensionMismatch");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("theta must be strictly positive") {
  CHECK_THROWS_AS(ThetaVector({1.0, 0.0}), LatticeError);
  CHECK_THROWS_AS(ThetaVector({-0.5}), LatticeError);
  CHECK_THROWS_AS(ThetaVector({INFINITY}), LatticeError);
  const ThetaVector th{0.5, 2.0, 1.5};
  CHECK(th.min_theta() == 0.5);
  CHECK(th.dot({2, -1, 2}) == doctest::Approx(2.0));
}

TEST_CASE("translate") {
  LatticeField f(Window({0, 0}, {2, 3}), {1, 2, 3, 4, 5, 6});
  CHECK(translate(f, {0, 0}) == f);
  CHECK(translate(translate(f, {4, -7}), {-4, 7}) == f);

  const LatticeField g = translate(f, {2, -1});
  CHECK(g.window().origin == MultiIndex{2, -1});
  CHECK(std::equal(g.values().begin(), g.values().end(), f.values().begin()));
  for_each_point(f.window(), [&](const MultiIndex& t) { CHECK(g.get(t + MultiIndex{2, -1}) == f.get(t)); });

  CHECK(translate(translate(f, {1, 2}), {3, -5}) == translate(f, {4, -3}));
  CHECK_THROWS_AS(translate(f, {1}), LatticeError);
}

TEST_CASE("corner signs") {
  const auto& c1 = corner_signs(1);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0].offset == MultiIndex{0});
  CHECK(c1[0].sign == 1);
  CHECK(c1[1].offset == MultiIndex{1});
  CHECK(c1[1].sign == -1);

  const auto& c2 = corner_signs(2);
  REQUIRE(c2.size() == 4);
  const MultiIndex order[] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const int signs[] = {1, -1, -1, 1};
  for (int k = 0; k < 4; ++k) {
    CHECK(c2[static_cast<std::size_t>(k)].offset == order[k]);
    CHECK(c2[static_cast<std::size_t>(k)].sign == signs[k]);
  }

  for (int n = 1; n <= kMaxDim; ++n) {
    const auto& c = corner_signs(n);
    CHECK(c.size() == (std::size_t{1} << n));
    int total = 0;
    for (const auto& k : c) {
      total += k.sign;
      CHECK(k.sign == ((k.weight % 2) ? -1 : 1));
      CHECK(k.weight == k.offset.sum());
    }
    CHECK(total == 0);
  }
}

TEST_CASE("window helpers") {
  const Window w = Window::from_bounds({-2, 1}, {3, 4});
  CHECK(w.volume() == 15);
  CHECK(w.contains(MultiIndex{2, 3}));
  CHECK_FALSE(w.contains(MultiIndex{3, 3}));
  for (std::size_t k = 0; k < w.volume(); ++k) CHECK(w.offset_of(w.point_at(k)) == k);
  const Window h = w.hull(Window({5, -1}, {1, 1}));
  CHECK(h.lo() == MultiIndex{-2, -1});
  CHECK(h.hi() == MultiIndex{6, 4});
  CHECK(w.to_string() == "[-2:3,1:4)");
}

TEST_CASE("compensated sum recovers small terms") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}
