#include <cmath>
#include <random>

#include "doctest.h"
#include "ergode/errors.hpp"
#include "ergode/word_count.hpp"

using namespace ergode;

TEST_CASE("whole-space and window counts") {
  auto fs2 = System::full_shift(2);
  CHECK(word_count_rate(fs2, SubsetSpec::whole_space(), 10) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double r = word_count_rate(fs2, SubsetSpec::frequency_window(0, 0.5, 0.5), 10);
  CHECK(r == doctest::Approx(std::log(252.0) / 10).epsilon(1e-12));
  CHECK(r == doctest::Approx(0.5529).epsilon(1e-4));
}

TEST_CASE("golden mean growth rate") {
  auto gm = System::markov_shift({{1, 1}, {1, 0}});
  const double golden = std::log((1 + std::sqrt(5.0)) / 2);
  CHECK(word_count_rate(gm, SubsetSpec::whole_space(), 100000) == doctest::Approx(golden).epsilon(1e-4));
  CHECK(golden == doctest::Approx(0.4812).epsilon(1e-4));
  // Fibonacci oracle: words of length n number F(n+2)
  double a = 1, b = 2;
  for (int n = 1; n < 40; ++n) {
    const double c = a + b;
    a = b;
    b = c;
  }
  CHECK(log_word_count(gm, SubsetSpec::whole_space(), 40) == doctest::Approx(std::log(b)).epsilon(1e-12));
}

TEST_CASE("exact counts agree with enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<System> systems = {System::full_shift(2), System::full_shift(3),
                                 System::markov_shift({{1, 1}, {1, 0}}),
                                 System::markov_shift({{0, 1, 1}, {1, 0, 1}, {1, 1, 1}}),
                                 System::disjoint_union(System::full_shift(2), System::markov_shift({{1, 1}, {1, 0}}))};
  for (int trial = 0; trial < 40; ++trial) {
    const System& sys = systems[static_cast<std::size_t>(trial) % systems.size()];
    const int n = 4 + static_cast<int>(u(rng) * 10);
    const double lo = u(rng) * 0.6;
    const double hi = lo + u(rng) * 0.5;
    const Symbol a = static_cast<Symbol>(trial % 2);
    std::vector<SubsetSpec> specs = {SubsetSpec::whole_space(), SubsetSpec::frequency_window(a, lo, hi),
                                     SubsetSpec::oscillation_windows(a, {{2, 0.0, 0.5}, {5, lo, hi}, {9, 0.2, 1.0}}),
                                     SubsetSpec::component_window(trial % 2 ? 1 : 0, 0.5, 1.0)};
    for (const auto& Y : specs) {
      const double exact = log_word_count(sys, Y, static_cast<std::uint64_t>(n));
      const double brute = brute_force_log_count(sys, Y, n, false);
      CAPTURE(Y.describe());
      CAPTURE(n);
      if (std::isinf(brute)) {
        CHECK(std::isinf(exact));
      } else {
        CHECK(exact == doctest::Approx(brute).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("enumeration is thread-count independent") {
  auto sys = System::markov_shift({{1, 1, 0}, {1, 1, 1}, {0, 1, 1}});
  auto Y = SubsetSpec::frequency_window(1, 0.3, 0.6);
  CHECK(brute_force_log_count(sys, Y, 13, false) == brute_force_log_count(sys, Y, 13, true));
}

TEST_CASE("large windows stay finite") {
  auto fs2 = System::full_shift(2);
  const double r = word_count_rate(fs2, SubsetSpec::frequency_window(0, 0.28, 0.32), 2000);
  // binomial oracle: largest term dominates up to log(window width)/n
  const double top = (std::lgamma(2001.0) - std::lgamma(641.0) - std::lgamma(1361.0)) / 2000;
  CHECK(r >= top);
  CHECK(r <= top + std::log(81.0) / 2000);
  auto gm = System::markov_shift({{1, 1}, {1, 0}});
  const double g = word_count_rate(gm, SubsetSpec::frequency_window(1, 0.0, 1.0), 3000);
  CHECK(g == doctest::Approx(word_count_rate(gm, SubsetSpec::whole_space(), 3000)).epsilon(1e-10));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(SubsetSpec::frequency_window(0, NAN, 1.0), ValidationError);
  CHECK_THROWS_AS(SubsetSpec::component_window(2, 0, 1), ValidationError);
  CHECK_THROWS_AS(log_word_count(System::circle_rotation(0.3), SubsetSpec::whole_space(), 5), ValidationError);
  CHECK_THROWS_AS(brute_force_log_count(System::full_shift(4), SubsetSpec::whole_space(), 20), BudgetExceeded);
  CHECK_THROWS_AS(word_count_rate(System::full_shift(2), SubsetSpec::sample_cloud({PointGenerator::explicit_word({0})}), 5),
                  ValidationError);
}
