#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ergode/birkhoff.hpp"
#include "ergode/errors.hpp"

using namespace ergode;

TEST_CASE("constant observable averages to the constant") {
  MapDynamics sys = System::full_shift(2);
  auto x = PointGenerator::seeded_iid(4, {0.5, 0.5});
  CHECK(birkhoff_average_map(sys, Observable::constant(1.0), x, 12345) == 1.0);
  CHECK(birkhoff_average_map(sys, Observable::constant(-2.5), x, 1000) == -2.5);
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::cylinder(1, 2, {0.6, 1.7}));
  const FlowAverage fa = birkhoff_average_flow(flow, Observable::constant(1.0), x.with_fiber(0.0), 500.0);
  CHECK(std::abs(fa.value - 1.0) <= fa.bound + 1e-12);
  auto rot = Flow::rotation();
  const FlowAverage fr = birkhoff_average_flow(rot, Observable::constant(3.0), PointGenerator::coordinate({0.2}), 10.0);
  CHECK(std::abs(fr.value - 3.0) <= fr.bound + 1e-12);
}

TEST_CASE("map averages on circle systems") {
  MapDynamics dbl = System::circle_mult(2);
  CHECK(birkhoff_average_map(dbl, Observable::coordinate(), PointGenerator::coordinate({0.0}), 100) == 0.0);

  const double theta = std::sqrt(2.0) - 1.0;
  MapDynamics rot = System::circle_rotation(theta);
  const double x0 = 0.123;
  const double avg = birkhoff_average_map(rot, Observable::harmonic(1, true), PointGenerator::coordinate({x0}), 100000);
  CHECK(std::abs(avg) < 0.01);
  // direct summation oracle at the same n
  double direct = 0.0;
  for (int j = 0; j < 100000; ++j) direct += std::sin(2 * std::numbers::pi * (x0 + j * theta));
  CHECK(avg == doctest::Approx(direct / 100000).epsilon(1e-9));
}

TEST_CASE("flow averages") {
  auto rot = Flow::rotation();
  const FlowAverage fa = birkhoff_average_flow(rot, Observable::harmonic(1, true), PointGenerator::coordinate({0.37}), 1000.0);
  CHECK(std::abs(fa.value) < 0.01);
  // closed form: (cos(2 pi x) - cos(2 pi (x + T))) / (2 pi T)
  const double T = 12.345, x = 0.2;
  const FlowAverage fb = birkhoff_average_flow(rot, Observable::harmonic(1, true), PointGenerator::coordinate({x}), T);
  const double exact = (std::cos(2 * std::numbers::pi * x) - std::cos(2 * std::numbers::pi * (x + T))) / (2 * std::numbers::pi * T);
  CHECK(std::abs(fb.value - exact) <= fb.bound);
}

TEST_CASE("unit-roof decomposition of the flow average") {
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::constant(1.0));
  auto x = PointGenerator::seeded_iid(17, {0.4, 0.6}).with_fiber(0.0);
  auto phi = Observable::fiber_profile(Observable::cylinder({0, 1}), {{0.0, 0.2}, {0.3, 1.0}, {1.0, 0.2}});
  const int N = 200;
  const FlowAverage direct = birkhoff_average_flow(flow, phi, x, N);
  // other order: sum over unit cells of a midpoint quadrature of t -> phi(phi^t(phi^j x))
  const int nodes = 64;
  double sum = 0.0;
  MapDynamics one = time_map(flow, 1.0);
  PointGenerator p = x;
  for (int j = 0; j < N; ++j) {
    double cell = 0.0;
    for (int i = 0; i < nodes; ++i) cell += phi.eval(time_t_map(flow, (i + 0.5) / nodes, p));
    sum += cell / nodes;
    p = step(one, p);
  }
  const double quad_bound = phi.flow_lipschitz() / nodes;
  CHECK(std::abs(direct.value - sum / N) <= 2 * std::max(quad_bound, direct.bound));
}

TEST_CASE("empirical measures") {
  MapDynamics sys = System::full_shift(2);
  auto x = PointGenerator::explicit_word({0, 1, 1});
  auto e1 = empirical_measure(sys, x, 1);
  CHECK(e1.as<Atomic>()->points.size() == 1);
  CHECK(same_point(e1.as<Atomic>()->points[0], x));
  auto fixed = PointGenerator::explicit_word({1});
  auto ef = empirical_measure(sys, fixed, 37);
  CHECK(ef.as<Atomic>()->points.size() == 1);
  CHECK(ef.as<Atomic>()->weights[0] == 1.0);
  auto per2 = PointGenerator::explicit_word({0, 1});
  auto e2 = empirical_measure(sys, per2, 10);
  REQUIRE(e2.as<Atomic>()->points.size() == 2);
  CHECK(e2.as<Atomic>()->weights[0] == 0.5);
  CHECK(e2.as<Atomic>()->weights[1] == 0.5);
  auto r = PointGenerator::seeded_iid(1, {0.5, 0.5});
  for (std::uint64_t n : {1u, 7u, 100u, 999u}) CHECK(std::abs(empirical_measure(sys, r, n).total_mass() - 1.0) <= 1e-12);
}

TEST_CASE("limit points of a fixed point") {
  auto sys = System::full_shift(2);
  auto fixed = PointGenerator::explicit_word({0});
  auto fam = TestFamily::for_system(sys, 4);
  auto clusters = limit_point_set(sys, fixed, Schedule::geometric(10, 1e4, 2.0, true), fam, 0.02);
  REQUIRE(clusters.size() == 1);
  const auto delta = family_integrals(Measure::dirac(fixed), fam);
  CHECK(weak_star_distance(clusters[0].integrals, delta, fam) == 0.0);
}

TEST_CASE("rotation flow example") {
  auto flow = Flow::rotation();
  auto leb = Measure::lebesgue();
  auto fam = TestFamily::for_flow(flow);
  MapDynamics half = time_map(flow, 0.5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    auto x = PointGenerator::coordinate({u(rng)});
    CHECK(classify_generic(flow, x, leb, fam, Schedule::flow_default(), 0.02).label == Label::Generic);
    const Verdict v = classify_generic(half, x, leb, fam, Schedule::map_default(), 0.02);
    CHECK(v.label == Label::NotGeneric);
    CHECK(v.witness.find("q=2") != std::string::npos);
  }
}

TEST_CASE("irregularity of simple points") {
  MapDynamics sys = System::full_shift(2);
  CHECK(classify_irregular(sys, PointGenerator::explicit_word({0}), Observable::symbol_frequency(0),
                           Schedule::map_default(), 0.02)
            .label == Label::Regular);
  // blocks of 0s and 1s with lengths growing 4x: prefix frequency swings
  std::vector<Block> blocks;
  std::uint64_t len = 100;
  for (int j = 0; j < 9; ++j) {
    blocks.push_back({{static_cast<Symbol>(j % 2)}, len});
    len *= 4;
  }
  auto x = PointGenerator::block_schedule(blocks);
  const Verdict v = classify_irregular(sys, x, Observable::symbol_frequency(0), Schedule::map_default(), 0.02);
  CHECK(v.label == Label::Irregular);
  CHECK(v.gap >= 0.5);
  auto clusters = limit_point_set(sys, x, Schedule::map_default(), TestFamily::for_system(System::full_shift(2)), 0.05);
  CHECK(clusters.size() >= 2);
}

TEST_CASE("serial and parallel averages agree bitwise") {
  MapDynamics sys = System::full_shift(3);
  auto x = PointGenerator::seeded_iid(8, {0.2, 0.3, 0.5});
  auto fam = TestFamily::for_system(System::full_shift(3), 4);
  auto s = Schedule::geometric(100, 300000, 2.0, true);
  const auto a = map_averages(sys, fam.observables, x, s, false);
  const auto b = map_averages(sys, fam.observables, x, s, true);
  CHECK(a.values == b.values);
}

TEST_CASE("time-map orbits match stepping") {
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::cylinder(1, 2, {0.7, 1.3}));
  MapDynamics tm = time_map(flow, 0.9);
  auto x = PointGenerator::seeded_iid(3, {0.5, 0.5}).with_fiber(0.2);
  auto phi = Observable::fiber_profile(Observable::symbol_frequency(1), {{0.0, 0.0}, {1.3, 1.0}});
  double direct = 0.0;
  PointGenerator p = x;
  for (int j = 0; j < 500; ++j) {
    direct += phi.eval(p);
    p = step(tm, p);
  }
  CHECK(birkhoff_average_map(tm, phi, x, 500) == doctest::Approx(direct / 500).epsilon(1e-9));
}
