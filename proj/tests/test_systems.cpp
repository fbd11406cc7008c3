#include <cmath>
#include <random>

#include "doctest.h"
#include "ergode/errors.hpp"
#include "ergode/systems.hpp"

using namespace ergode;

TEST_CASE("full shift steps left") {
  auto sys = System::full_shift(2);
  auto x = PointGenerator::explicit_word({0, 1});
  auto y = step(sys, x);
  CHECK(y.prefix(6) == Word{1, 0, 1, 0, 1, 0});
}

TEST_CASE("circle maps") {
  auto dbl = System::circle_mult(2);
  CHECK(step(dbl, PointGenerator::coordinate({0.0})).coords()[0] == 0.0);
  auto rot = System::circle_rotation(0.25);
  CHECK(step(rot, PointGenerator::coordinate({0.9})).coords()[0] == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("period r word returns after r steps") {
  for (int r = 1; r <= 7; ++r) {
    Word w;
    for (int i = 0; i < r; ++i) w.push_back(static_cast<Symbol>((i * 5 + 1) % 3));
    auto x = PointGenerator::explicit_word(w);
    MapDynamics dyn = System::full_shift(3);
    PointGenerator y = x;
    for (int i = 0; i < r; ++i) y = step(dyn, y);
    CHECK(y.prefix(100) == x.prefix(100));
  }
}

TEST_CASE("suspension time-t map crosses roofs") {
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::constant(1.0));
  auto x = PointGenerator::explicit_word({0, 1, 1, 0, 1}).with_fiber(0.0);
  auto y = time_t_map(flow, 1.0, x);
  CHECK(y.prefix(10) == x.shifted(1).prefix(10));
  CHECK(*y.fiber() == 0.0);
  auto z = time_t_map(flow, 2.5, x);
  CHECK(z.prefix(10) == x.shifted(2).prefix(10));
  CHECK(*z.fiber() == doctest::Approx(0.5).epsilon(1e-15));
  auto id = time_t_map(flow, 0.0, x);
  CHECK(same_point(id, x));
}

TEST_CASE("negative time rejected over a shift base") {
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::constant(1.0));
  auto x = PointGenerator::explicit_word({0, 1}).with_fiber(0.0);
  CHECK_THROWS_AS(time_t_map(flow, -0.5, x), ValidationError);
  auto rot = Flow::rotation();
  CHECK(time_t_map(rot, -0.25, PointGenerator::coordinate({0.1})).coords()[0] == doctest::Approx(0.85));
}

TEST_CASE("flow property on random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rot = Flow::rotation();
  auto torus = Flow::torus_translation({std::sqrt(2.0), std::sqrt(3.0)});
  auto susp = Flow::suspension(System::full_shift(2), RoofFunction::constant(1.0));
  auto susp_var = Flow::suspension(System::full_shift(2), RoofFunction::cylinder(1, 2, {0.7, 1.6}));
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 5.0 * u(rng);
    const double s = 5.0 * u(rng);
    auto c = PointGenerator::coordinate({u(rng)});
    auto a = time_t_map(rot, t + s, c);
    auto b = time_t_map(rot, t, time_t_map(rot, s, c));
    CHECK(circle_gap(a.coords()[0], b.coords()[0]) < 1e-12);

    auto c2 = PointGenerator::coordinate({u(rng), u(rng)});
    auto a2 = time_t_map(torus, t + s, c2);
    auto b2 = time_t_map(torus, t, time_t_map(torus, s, c2));
    CHECK(circle_gap(a2.coords()[1], b2.coords()[1]) < 1e-12);

    auto p = PointGenerator::seeded_iid(static_cast<std::uint64_t>(trial), {0.5, 0.5});
    for (const Flow* f : {&susp, &susp_var}) {
      auto x = p.with_fiber(0.5 * u(rng));
      auto lhs = time_t_map(*f, t + s, x);
      auto rhs = time_t_map(*f, t, time_t_map(*f, s, x));
      CHECK(lhs.offset() == rhs.offset());
      CHECK(std::abs(*lhs.fiber() - *rhs.fiber()) < 1e-12);
    }
  }
}

TEST_CASE("distances") {
  auto m = MetricSpec::of(System::full_shift(2));
  auto x = PointGenerator::explicit_word({0, 0, 0, 0, 0, 0, 0, 0});
  auto y = PointGenerator::explicit_word({0, 0, 0, 1, 0, 0, 0, 0});
  CHECK(distance(m, x, x, 64).value == 0.0);
  CHECK(distance(m, x, x, 64).truncated);
  CHECK(distance(m, x, y, 64).value == 0.125);
  CHECK(distance(m, y, x, 64).value == 0.125);
  CHECK(distance(m, x, y, 3).value == 0.0);

  auto u = System::disjoint_union(System::full_shift(2), System::full_shift(2));
  auto mu = MetricSpec::of(u);
  CHECK(distance(mu, x.with_component({0}), x.with_component({1}), 64).value == 1.0);
  CHECK(distance(mu, x.with_component({1}), y.with_component({1}), 64).value == 0.125);

  auto mc = MetricSpec::of(System::circle_rotation(0.3));
  CHECK(distance(mc, PointGenerator::coordinate({0.95}), PointGenerator::coordinate({0.05}), 1).value ==
        doctest::Approx(0.1));
}

TEST_CASE("planted disagreement index and symmetry") {
  std::mt19937_64 rng(5);
  auto m = MetricSpec::of(System::full_shift(2));
  for (int i = 0; i < 40; ++i) {
    Word a(50), b;
    for (auto& s : a) s = static_cast<Symbol>(rng() & 1);
    b = a;
    b[static_cast<std::size_t>(i)] ^= 1;
    auto x = PointGenerator::explicit_word(a);
    auto y = PointGenerator::explicit_word(b);
    CHECK(distance(m, x, y, 64).value == std::ldexp(1.0, -i));
    CHECK(distance(m, y, x, 64).value == distance(m, x, y, 64).value);
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(System::full_shift(1), ValidationError);
  CHECK_THROWS_AS(System::markov_shift({{1, 0}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(RoofFunction::constant(-1.0), ValidationError);
  CHECK_THROWS_AS(step(System::circle_rotation(0.1), PointGenerator::explicit_word({0})), ValidationError);
  CHECK(System::golden_mean().allowed(0, 1));
  CHECK_FALSE(System::golden_mean().allowed(1, 1));
}
