#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "ergode/birkhoff.hpp"
#include "ergode/constructions.hpp"
#include "ergode/entropy.hpp"
#include "ergode/errors.hpp"

using namespace ergode;

namespace {

// empirical frequency of every word of length <= 4 in the first n symbols
std::map<Word, double> word_frequencies(const PointGenerator& x, std::size_t n, std::size_t L) {
  const Word w = x.prefix(n + L);
  std::map<Word, double> f;
  for (std::size_t i = 0; i < n; ++i) f[Word(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i + L))] += 1.0 / static_cast<double>(n);
  return f;
}

// naive Bowen-ball test: d(f^i x, f^i y) < eps for all i < n
bool in_bowen_ball(const PointGenerator& x, const PointGenerator& y, std::uint64_t n, double eps) {
  const MetricSpec m = MetricSpec::of(System::full_shift(2));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (distance(m, x.shifted(i), y.shifted(i), 64).value >= eps) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("deterministic generic points reproduce cylinder masses") {
  const auto fair = Measure::bernoulli({0.5, 0.5});
  const auto x = generic_point(fair, GenericMode::DeterministicBlocks, 1000000).point;
  CHECK(classify_generic(System::full_shift(2), x, fair, TestFamily::for_system(System::full_shift(2)),
                         Schedule::map_default(), 0.02)
            .label == Label::Generic);
  for (const auto& mu : {fair, Measure::bernoulli({0.2, 0.8}), Measure::markov({{0.9, 0.1}, {0.2, 0.8}}),
                         Measure::markov({{0.5, 0.5}, {1.0, 0.0}})}) {
    const auto g = generic_point(mu, GenericMode::DeterministicBlocks, 1000000);
    CHECK(!g.probabilistic);
    for (std::size_t L = 1; L <= 4; ++L) {
      for (const auto& [w, f] : word_frequencies(g.point, 1000000, L)) {
        CAPTURE(mu.describe());
        CAPTURE(L);
        CHECK(std::abs(f - cylinder_mass(mu, w)) <= 0.02);
      }
    }
  }
  // golden-mean support: the point must be admissible
  const auto gm = generic_point(Measure::markov({{0.5, 0.5}, {1.0, 0.0}}), GenericMode::DeterministicBlocks, 100000).point;
  CHECK_NOTHROW(check_point(System::golden_mean(), gm));
}

TEST_CASE("generic point examples") {
  const auto zero = generic_point(Measure::bernoulli({1.0, 0.0}), GenericMode::DeterministicBlocks, 1000).point;
  CHECK(same_point(zero, PointGenerator::explicit_word({0}), 5000));
  const auto m = Measure::markov({{0.9, 0.1}, {0.2, 0.8}});
  const auto x = generic_point(m, GenericMode::DeterministicBlocks, 1000000).point;
  const auto f = word_frequencies(x, 1000000, 2);
  const double pi0 = 2.0 / 3, pi1 = 1.0 / 3;
  CHECK(std::abs(f.at({0, 0}) - pi0 * 0.9) <= 0.02);
  CHECK(std::abs(f.at({0, 1}) - pi0 * 0.1) <= 0.02);
  CHECK(std::abs(f.at({1, 0}) - pi1 * 0.2) <= 0.02);
  CHECK(std::abs(f.at({1, 1}) - pi1 * 0.8) <= 0.02);
  const auto iid = generic_point(m, GenericMode::SeededIid, 200000, 3);
  CHECK(iid.probabilistic);
  CHECK(std::abs(word_frequencies(iid.point, 200000, 2).at({0, 1}) - pi0 * 0.1) <= 0.01);
  CHECK_THROWS_AS(generic_point(Measure::mixture({{Measure::bernoulli({0.5, 0.5}), 0.5}, {Measure::bernoulli({0.1, 0.9}), 0.5}}),
                                GenericMode::DeterministicBlocks, 100),
                  ValidationError);
  // same seed, same point
  const auto a = generic_point(Measure::bernoulli({0.3, 0.7}), GenericMode::DeterministicBlocks, 50000, 4).point;
  const auto b = generic_point(Measure::bernoulli({0.3, 0.7}), GenericMode::DeterministicBlocks, 50000, 4).point;
  CHECK(a.prefix(50000) == b.prefix(50000));
}

TEST_CASE("irregular points oscillate") {
  const auto fs2 = System::full_shift(2);
  const auto freq0 = Observable::symbol_frequency(0);
  const auto x3 = irregular_point(fs2, freq0, 0.3, 0.7, 3.0, 1000000);
  const Verdict v3 = classify_irregular(MapDynamics(fs2), x3, freq0, Schedule::map_default(), 0.02);
  CHECK(v3.label == Label::Irregular);
  CHECK(v3.gap >= 0.4 * (1 - 2.0 / 3) - 0.02);
  const auto x01 = irregular_point(fs2, freq0, 0.0, 1.0, 4.0, 1000000);
  CHECK(classify_irregular(MapDynamics(fs2), x01, freq0, Schedule::map_default(), 0.02).gap >= 0.5);
  const auto flat = irregular_point(fs2, freq0, 0.4, 0.4, 4.0, 1000000);
  CHECK(classify_irregular(MapDynamics(fs2), flat, freq0, Schedule::map_default(), 0.02).label == Label::Regular);
  // property: observed gap >= (hi - lo)(1 - 2/ratio) - 0.02 on a dense schedule
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double lo = u(rng) * 0.4, hi = 0.6 + u(rng) * 0.4, ratio = 2.0 + u(rng) * 4.0;
    const auto x = irregular_point(fs2, freq0, lo, hi, ratio, 2000000);
    const Verdict v = classify_irregular(MapDynamics(fs2), x, freq0, Schedule::geometric(1000, 2000000, 1.05, true), 0.02);
    CAPTURE(lo);
    CAPTURE(hi);
    CAPTURE(ratio);
    CHECK(v.gap >= (hi - lo) * (1 - 2 / ratio) - 0.02);
  }
  CHECK_THROWS_AS(irregular_point(fs2, freq0, 0.7, 0.3, 4.0, 1000), ValidationError);
  CHECK_THROWS_AS(irregular_point(System::golden_mean(), freq0, 0.3, 0.7, 4.0, 1000), Unsupported);
  CHECK_THROWS_AS(irregular_point(fs2, freq0, 0.3, 0.7, 1.5, 1000), ValidationError);
}

TEST_CASE("oscillation windows of an irregular point") {
  const auto fs2 = System::full_shift(2);
  const auto x = irregular_point(fs2, Observable::symbol_frequency(0), 0.3, 0.7, 4.0, 1000000);
  const auto Y = oscillation_windows_for(x, 0, 0.02, 2000);
  const auto* ow = Y.as<OscillationWindows>();
  REQUIRE(ow != nullptr);
  REQUIRE(ow->windows.size() == 2);
  // the point itself satisfies its windows
  CHECK(Y.admits(x.prefix(2000)));
  const double e = bowen_entropy_symbolic(fs2, Y, {2000}).value;
  CHECK(e >= 0.95 * std::log(2.0));
  // closed form: prefix-250 frequency <= 0.32, prefix-1000 frequency >= 0.58, rest free
  const auto& w0 = ow->windows[0];
  const auto& w1 = ow->windows[1];
  CHECK(w0.scale == 250);
  CHECK(w1.scale == 1000);
  // count by convolving the two binomial stages
  std::vector<double> first(251, -INFINITY);
  for (int c = 0; c <= 250; ++c) {
    if (c <= std::floor(w0.hi * 250 + 1e-9)) first[static_cast<std::size_t>(c)] = std::lgamma(251.0) - std::lgamma(c + 1.0) - std::lgamma(251.0 - c);
  }
  double total = -INFINITY;
  for (int c1 = 0; c1 <= 250; ++c1) {
    if (std::isinf(first[static_cast<std::size_t>(c1)])) continue;
    for (int c2 = 0; c2 <= 750; ++c2) {
      if (c1 + c2 < std::ceil(w1.lo * 1000 - 1e-9)) continue;
      total = log_add(total, first[static_cast<std::size_t>(c1)] + std::lgamma(751.0) - std::lgamma(c2 + 1.0) - std::lgamma(751.0 - c2));
    }
  }
  total += 1000 * std::log(2.0);
  CHECK(std::abs(e - total / 2000) <= 1e-3);
}

TEST_CASE("mistake functions") {
  const auto g = MistakeFunction::power_law(0.5, {{0.01, 4.0}, {0.1, 2.0}, {0.5, 1.0}}, 0.5);
  CHECK(g.c(0.001) == 4.0);
  CHECK(g.c(0.05) == 4.0);
  CHECK(g.c(0.2) == 2.0);
  CHECK(g.c(0.9) == 1.0);
  CHECK(g(100.0, 0.9) == g(100.0, 0.5));
  const auto lg = MistakeFunction::log_law({{0.1, 3.0}}, 0.1);
  for (const auto* f : {&g, &lg}) {
    double prev = INFINITY;
    for (double t : {1e3, 1e4, 1e5}) {
      const double r = (*f)(t, 0.05) / t;
      CHECK(r < prev);
      prev = r;
    }
    double last = 0.0;
    for (double t = 0; t < 50; t += 0.5) {
      CHECK((*f)(t, 0.05) >= last);
      last = (*f)(t, 0.05);
    }
  }
  CHECK_THROWS_AS(MistakeFunction::power_law(1.0, {{0.1, 1.0}}, 0.1), ValidationError);
  CHECK_THROWS_AS(MistakeFunction::power_law(0.5, {{0.1, 1.0}, {0.2, 2.0}}, 0.2), ValidationError);
}

TEST_CASE("mistake balls with g = 0 are Bowen balls") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fs2 = System::full_shift(2);
  const auto zero = MistakeFunction::zero();
  int agree = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 20);
    const double eps = std::ldexp(1.0, -static_cast<int>(u(rng) * 4)) * (0.6 + 0.4 * u(rng));
    Word a(n + 8), b;
    for (auto& s : a) s = u(rng) < 0.5;
    b = a;
    // flip a few symbols, sometimes none
    const int flips = static_cast<int>(u(rng) * 3);
    for (int f = 0; f < flips; ++f) {
      auto& s = b[static_cast<std::size_t>(u(rng) * static_cast<double>(b.size()))];
      s = static_cast<Symbol>(1 - s);
    }
    const auto x = PointGenerator::block_schedule({{a, a.size()}, {{0}, 1}});
    const auto y = PointGenerator::block_schedule({{b, b.size()}, {{0}, 1}});
    const bool fast = mistake_ball_membership(fs2, x, y, n, zero, eps).member;
    agree += fast == in_bowen_ball(x, y, n, eps);
  }
  CHECK(agree == 10000);

  const auto x = PointGenerator::seeded_iid(1, {0.5, 0.5});
  const auto same = mistake_ball_membership(fs2, x, x, 1000, MistakeFunction::power_law(0.5, {{0.1, 1.0}}, 0.1), 0.1);
  CHECK(same.member);
  CHECK(same.density == 0.0);
  // differing on a fraction 2 g(T, eps)/T of indices exceeds the budget
  const auto g = MistakeFunction::power_law(0.5, {{0.5, 1.0}}, 1.0);
  const std::uint64_t T = 10000;
  Word a = x.prefix(T + 1), b = a;
  const auto flips = static_cast<std::size_t>(2 * g(T, 1.0));
  for (std::size_t i = 0; i < flips; ++i) b[i * (T / flips)] ^= 1;
  const auto m = mistake_ball_membership(fs2, PointGenerator::explicit_word(a), PointGenerator::explicit_word(b), T, g, 1.0);
  CHECK(!m.member);
  CHECK(m.mistakes == static_cast<double>(flips));
}

TEST_CASE("flow mistake balls") {
  auto flow = Flow::suspension(System::full_shift(2), RoofFunction::constant(1.0));
  const auto x = PointGenerator::seeded_iid(2, {0.5, 0.5}).with_fiber(0.0);
  const auto g = MistakeFunction::power_law(0.5, {{0.1, 1.0}}, 0.1);
  const auto same = mistake_ball_membership(flow, x, x, 20.0, g, 0.1, 0.25);
  CHECK(same.member);
  CHECK(same.density == 0.0);
  const auto far = mistake_ball_membership(flow, x, x.with_fiber(0.5), 20.0, g, 0.1, 0.25);
  CHECK(!far.member);
  CHECK_THROWS_AS(mistake_ball_membership(flow, x, x, 20.0, g, 0.1, 0.5), ValidationError);
}

TEST_CASE("gluing orbits") {
  const auto fs2 = System::full_shift(2);
  const auto zero = MistakeFunction::zero();
  const std::vector<OrbitSpecSegment> two = {{PointGenerator::seeded_iid(1, {0.5, 0.5}), 100, 1.0},
                                             {PointGenerator::seeded_iid(2, {0.5, 0.5}), 100, 1.0}};
  const auto r = glue_orbits(fs2, two, zero);
  for (const auto& c : r.checks) {
    CHECK(c.member);
    CHECK(c.density == 0.0);
  }
  CHECK(r.point.prefix(100) == two[0].target.prefix(100));
  CHECK(r.point.shifted(100).prefix(100) == two[1].target.prefix(100));
  // smaller eps reaches across the junction, so g = 0 no longer suffices
  CHECK(std::isinf(declared_T_g(fs2, zero, 0.25)));

  const auto gm = System::golden_mean();
  const auto g = MistakeFunction::power_law(0.5, {{0.1, 1.0}}, 1.0);
  std::vector<OrbitSpecSegment> segs;
  for (int j = 0; j < 6; ++j) {
    // ends in 1 and starts with 1: a 0 connector is required
    segs.push_back({PointGenerator::explicit_word({1, 0}), j % 2 ? 201.0 : 101.0, 1.0});
  }
  const auto rg = glue_orbits(gm, segs, g);
  CHECK_NOTHROW(check_point(gm, rg.point));
  for (std::size_t j = 0; j < segs.size(); ++j) {
    CHECK(rg.checks[j].member);
    CHECK(rg.checks[j].density <= 1.0 / segs[j].duration + 1e-12);
    CHECK(rg.connector_lengths[j] == (j == 0 ? 0u : 1u));
  }
  CHECK(declared_T_g(gm, g, 1.0) == 1.0);
  CHECK_THROWS_AS(glue_orbits(gm, segs, zero), ValidationError);

  // two Bernoulli generic points with doubling durations give an irregular point
  std::vector<OrbitSpecSegment> alt;
  double d = 1000;
  std::uint64_t total = 0;
  for (int j = 0; total < 2000000; ++j) {
    alt.push_back({PointGenerator::seeded_iid(static_cast<std::uint64_t>(j), j % 2 ? std::vector<double>{0.8, 0.2} : std::vector<double>{0.2, 0.8}), d, 1.0});
    total += static_cast<std::uint64_t>(d);
    d = static_cast<double>(total);
  }
  const auto z = glue_orbits(fs2, alt, zero).point;
  CHECK(classify_irregular(MapDynamics(fs2), z, Observable::symbol_frequency(0), Schedule::map_default(), 0.02).label ==
        Label::Irregular);
}

TEST_CASE("counterexample system") {
  const auto ce = build_counterexample_system();
  CHECK(std::abs(metric_entropy(ce.mu, ce.system).value - std::log(2.0)) <= 1e-9);
  CHECK(!ce.mu.is_ergodic_kind());
  const auto fam = TestFamily::for_system(ce.system, 3);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = PointGenerator::seeded_iid(s, {0.5, 0.5}).with_component({static_cast<std::uint8_t>(s % 2)});
    CHECK(classify_generic(MapDynamics(ce.system), x, ce.mu, fam, Schedule::geometric(1000, 100000, 2.0, true), 0.02).label ==
          Label::NotGeneric);
  }
  const auto e = bowen_entropy_symbolic(ce.system, SubsetSpec::component_window(0, 0.48, 0.52), {100, 1000});
  CHECK(e.value == 0.0);
  CHECK(e.empty_cover);
  std::vector<PointGenerator> cloud;
  for (std::uint64_t s = 0; s < 5; ++s) cloud.push_back(PointGenerator::seeded_iid(s, {0.5, 0.5}).with_component({0}));
  const auto filt = std::make_shared<const SubsetSpec>(SubsetSpec::component_window(0, 0.48, 0.52));
  const auto ec = bowen_entropy_symbolic(ce.system, SubsetSpec::sample_cloud(cloud, filt), {50});
  CHECK(ec.value == 0.0);
  CHECK(ec.empty_cover);
  const auto ef = bowen_entropy_flow(ce.flow, SubsetSpec::component_window(0, 0.48, 0.52), {{100, 200}, {1.0}});
  CHECK(ef.value == 0.0);
  CHECK(ef.empty_cover);
}
