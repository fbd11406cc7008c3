#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ergode/point.hpp"
#include "ergode/systems.hpp"

namespace ergode {

class SubsetSpec;

struct WholeSpace {};
/// Words whose frequency of `a` lies in [lo, hi].
struct FrequencyWindow {
  Symbol a = 0;
  double lo = 0.0;
  double hi = 1.0;
};
struct OscillationWindow {
  std::uint64_t scale = 1;
  double lo = 0.0;
  double hi = 1.0;
};
/// Words whose prefix frequency of `a` at each scale <= n lies in that scale's window.
struct OscillationWindows {
  Symbol a = 0;
  std::vector<OscillationWindow> windows;
};
/// Words whose fraction of time spent on disjoint-union component c lies in
/// [lo, hi]; orbits never change component, so the fraction is 0 or 1.
struct ComponentWindow {
  std::uint8_t c = 0;
  double lo = 0.0;
  double hi = 1.0;
};
/// A finite set of points, optionally restricted by a word predicate.
struct SampleCloud {
  std::vector<PointGenerator> points;
  std::shared_ptr<const SubsetSpec> filter;
};

class SubsetSpec {
 public:
  using Kind = std::variant<WholeSpace, FrequencyWindow, OscillationWindows, ComponentWindow, SampleCloud>;

  static SubsetSpec whole_space();
  static SubsetSpec frequency_window(Symbol a, double lo, double hi);
  static SubsetSpec oscillation_windows(Symbol a, std::vector<OscillationWindow> windows);
  static SubsetSpec component_window(std::uint8_t c, double lo, double hi);
  static SubsetSpec sample_cloud(std::vector<PointGenerator> points, std::shared_ptr<const SubsetSpec> filter = nullptr);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }
  bool is_predicate() const { return !std::holds_alternative<SampleCloud>(kind_); }

  /// Predicate on a finite word living on the given component path.
  bool admits(std::span<const Symbol> word, const ComponentPath& path = {}) const;
  std::string describe() const;

 private:
  explicit SubsetSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Log of the number of admissible length-n words satisfying a predicate,
/// split by the last symbol (-inf where there are none). Full shifts keep a
/// single entry since nothing downstream depends on the last symbol.
struct LogCounts {
  ComponentPath path;
  std::vector<double> by_last;
  double total() const;
};

/// Exact log word counts for every leaf of `system`: transfer matrix for the
/// whole space, binomial sums for frequency windows on full shifts, and a
/// (last symbol, count) dynamic program otherwise.
std::vector<LogCounts> log_word_counts(const System& system, const SubsetSpec& Y, std::uint64_t n);
double log_word_count(const System& system, const SubsetSpec& Y, std::uint64_t n);

/// Enumeration oracle: log of the brute-force count over all k^n words.
double brute_force_log_count(const System& system, const SubsetSpec& Y, int n, bool use_parallel = true);

/// (1/n) log #words, exact. Throws BudgetExceeded when neither a closed form
/// nor a feasible enumeration exists.
double word_count_rate(const System& system, const SubsetSpec& Y, std::uint64_t n);

/// log sum exp
double log_add(double a, double b);

}  // namespace ergode
