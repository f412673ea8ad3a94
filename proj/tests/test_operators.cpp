#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "latfield/operators.hpp"

using namespace latfield;

namespace {

LatticeField random_field(const Window& w, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  return LatticeField::generate(w, [&](const MultiIndex&) { return nd(gen); });
}

}  // namespace

TEST_CASE("square increment of simple fields") {
  const Window w({-2, -3}, {5, 6});
  const auto c = LatticeField::generate(w, [](const MultiIndex&) { return 2.5; });
  const auto prod = LatticeField::generate(w, [](const MultiIndex& t) { return double(t[0] * t[1]); });
  for_each_point(Window({-1, -2}, {4, 5}), [&](const MultiIndex& t) {
    CHECK(square_increment(c, t) == 0.0);
    CHECK(square_increment(prod, t) == 1.0);
  });

  LatticeField f(Window({0, 0}, {2, 2}));
  f.set({1, 1}, 4);
  f.set({0, 1}, 2);
  f.set({1, 0}, 3);
  f.set({0, 0}, 1);
  CHECK(square_increment(f, {1, 1}) == 0.0);
}

TEST_CASE("square increment names the missing corner") {
  LatticeField f(Window({0, 0}, {2, 2}));
  try {
    square_increment(f, {0, 1});
    FAIL("expected OutOfWindow");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::OutOfWindow);
    CHECK(std::string(e.what()).find("(-1,") != std::string::npos);
  }
}

TEST_CASE("increment field") {
  const auto f = LatticeField::generate(Window({0, 0}, {2, 2}), [](const MultiIndex& t) { return double(t[0] + 3 * t[1]); });
  const IncrementField d = increment_field(f);
  CHECK(d.inner.window() == Window({1, 1}, {1, 1}));

  const auto lin = LatticeField::generate(Window({-3, 2}, {5, 4}), [](const MultiIndex& t) { return 0.5 * t[0] - 2.0 * t[1]; });
  const IncrementField dl = increment_field(lin);
  for (double v : dl.inner.values()) CHECK(v == 0.0);

  const auto prod = LatticeField::generate(Window({0, 0}, {3, 3}), [](const MultiIndex& t) { return double(t[0] * t[1]); });
  const IncrementField p = increment_field(prod);
  CHECK(p.inner.values().size() == 4);
  for (double v : p.inner.values()) CHECK(v == 1.0);

  try {
    increment_field(LatticeField(Window({0, 0}, {1, 3})));
    FAIL("expected WindowTooSmall");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::WindowTooSmall);
  }
}

TEST_CASE("previous value") {
  const auto f = random_field(Window({0, 0}, {4, 4}), 1);
  const MultiIndex t{2, 3};
  CHECK(previous_value(f, t) == doctest::Approx(f.get({1, 3}) + f.get({2, 2}) - f.get({1, 2})).epsilon(1e-15));

  const auto g = random_field(Window({-5}, {10}), 2);
  CHECK(previous_value(g, {2}) == g.get({1}));
  CHECK(square_increment(g, {2}) == g.get({2}) - g.get({1}));

  const auto c = LatticeField::generate(Window({0, 0, 0}, {2, 2, 2}), [](const MultiIndex&) { return -7.25; });
  CHECK(previous_value(c, {1, 1, 1}) == -7.25);
}

TEST_CASE("identity decomposition X = X^- + Delta X") {
  for (int n = 1; n <= 4; ++n) {
    const Window w(MultiIndex::filled(n, -1), MultiIndex::filled(n, 4));
    const auto f = random_field(w, 10 + n);
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = 4.0 * (1 << n) * eps * f.max_abs();
    for_each_point(Window(MultiIndex::filled(n, 0), MultiIndex::filled(n, 3)), [&](const MultiIndex& t) {
      CHECK(std::fabs(f(t) - (previous_value(f, t) + square_increment(f, t))) <= tol);
    });
  }
}

TEST_CASE("theta inner product") {
  const ThetaVector th{0.3, 1.7};
  const auto f = random_field(Window({0, 0}, {3, 3}), 4);
  const MultiIndex t{1, 2};
  const double expect = std::exp(-0.3) * f.get({0, 2}) + std::exp(-1.7) * f.get({1, 1}) - std::exp(-2.0) * f.get({0, 1});
  CHECK(theta_inner_product(th, f, t) == doctest::Approx(expect).epsilon(1e-14));

  const auto g = random_field(Window({0}, {3}), 5);
  CHECK(theta_inner_product(ThetaVector{0.8}, g, {2}) == std::exp(-0.8) * g.get({1}));

  // Near theta = 0 the weights of a constant field sum to 1.
  const auto c = LatticeField::generate(Window({0, 0, 0}, {2, 2, 2}), [](const MultiIndex&) { return 3.0; });
  CHECK(theta_inner_product(ThetaVector{1e-9, 1e-9, 1e-9}, c, {1, 1, 1}) == doctest::Approx(3.0).epsilon(1e-8));

  const LatticeField z(Window({0, 0}, {2, 2}));
  CHECK(theta_inner_product(th, z, {1, 1}) == 0.0);
  CHECK_THROWS_AS(theta_inner_product(ThetaVector{1.0}, f, t), LatticeError);
}

TEST_CASE("linearity of the stencils") {
  const Window w({0, 0, 0}, {3, 3, 3});
  const auto f = random_field(w, 6), g = random_field(w, 7);
  const double a = 1.75, b = -0.4;
  const auto h = LatticeField::generate(w, [&](const MultiIndex& t) { return a * f(t) + b * g(t); });
  const ThetaVector th{0.5, 1.0, 1.5};
  const MultiIndex t{2, 1, 2};
  CHECK(square_increment(h, t) == doctest::Approx(a * square_increment(f, t) + b * square_increment(g, t)).epsilon(1e-13));
  CHECK(previous_value(h, t) == doctest::Approx(a * previous_value(f, t) + b * previous_value(g, t)).epsilon(1e-13));
  CHECK(theta_inner_product(th, h, t) ==
        doctest::Approx(a * theta_inner_product(th, f, t) + b * theta_inner_product(th, g, t)).epsilon(1e-13));
}

TEST_CASE("rectangular increment") {
  const auto prod = LatticeField::generate(Window({-1, -1}, {5, 6}), [](const MultiIndex& t) { return double(t[0] * t[1]); });
  CHECK(rectangular_increment(prod, {0, 0}, {2, 3}) == 6.0);

  const auto f = random_field(Window({0, 0}, {5, 5}), 8);
  CHECK(rectangular_increment(f, {1, 2}, {2, 3}) == square_increment(f, {2, 3}));

  const auto c = LatticeField::generate(Window({0, 0}, {4, 4}), [](const MultiIndex&) { return 9.0; });
  CHECK(rectangular_increment(c, {0, 1}, {3, 2}) == 0.0);

  try {
    rectangular_increment(f, {1, 1}, {1, 3});
    FAIL("expected DegenerateBox");
  } catch (const LatticeError& e) {
    CHECK(e.kind() == ErrorKind::DegenerateBox);
  }
  CHECK_THROWS_AS(rectangular_increment(f, {0, 0}, {5, 2}), LatticeError);
}

TEST_CASE("telescoping over boxes") {
  for (int n = 1; n <= 3; ++n) {
    const Window w(MultiIndex::filled(n, 0), MultiIndex::filled(n, 5));
    const auto f = random_field(w, 20 + n);
    const MultiIndex a = MultiIndex::filled(n, 0), b = MultiIndex::filled(n, 4) - MultiIndex::unit(n, 0);
    double cells = 0.0;
    std::size_t vol = 1;
    for (int l = 0; l < n; ++l) vol *= static_cast<std::size_t>(b[l] - a[l]);
    for_each_point(Window(a + MultiIndex::filled(n, 1), b - a), [&](const MultiIndex& t) { cells += square_increment(f, t); });
    CHECK(std::fabs(rectangular_increment(f, a, b) - cells) <= 1e-12 * double(vol) * f.max_abs());
  }
}
