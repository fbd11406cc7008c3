#include "ergode/word_count.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergode/errors.hpp"
#include "ergode/kernels.hpp"

namespace ergode {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kNegInf = -INFINITY;
constexpr double kDpBudget = 6e9;
constexpr std::uint64_t kEnumBudget = std::uint64_t{1} << 28;

void check_window(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi), "window bounds must be finite");
}

std::int64_t count_min(double lo, std::uint64_t n) {
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(lo * static_cast<double>(n) - 1e-9)));
}
std::int64_t count_max(double hi, std::uint64_t n) {
  return std::min<std::int64_t>(static_cast<std::int64_t>(n),
                                static_cast<std::int64_t>(std::floor(hi * static_cast<double>(n) + 1e-9)));
}

double log_binomial(std::uint64_t n, std::uint64_t c) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(c) + 1) -
         std::lgamma(static_cast<double>(n - c) + 1);
}

bool is_full(const System& leaf) { return leaf.as<FullShift>() != nullptr; }

// Whole-space counts by last symbol: v_{i+1}[b] = sum_a v_i[a] A[a][b].
LogCounts transfer_counts(const System& leaf, std::uint64_t n) {
  const int k = leaf.alphabet_size();
  LogCounts out;
  if (is_full(leaf)) {
    out.by_last = {static_cast<double>(n) * std::log(static_cast<double>(k))};
    return out;
  }
  const auto A = leaf.adjacency();
  const auto K = static_cast<std::size_t>(k);
  std::vector<double> v(K, 1.0), next(K);
  double scale = 0.0;
  for (std::uint64_t i = 1; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < K; ++a) {
      if (v[a] == 0.0) continue;
      for (std::size_t b = 0; b < K; ++b) {
        if (A[a * K + b]) next[b] += v[a];
      }
    }
    const double m = *std::max_element(next.begin(), next.end());
    for (std::size_t b = 0; b < K; ++b) v[b] = next[b] / m;
    scale += std::log(m);
  }
  out.by_last.resize(K);
  for (std::size_t b = 0; b < K; ++b) out.by_last[b] = v[b] > 0.0 ? scale + std::log(v[b]) : kNegInf;
  return out;
}

LogCounts binomial_counts(const System& leaf, const FrequencyWindow& w, std::uint64_t n) {
  const double km1 = std::log(static_cast<double>(leaf.alphabet_size() - 1));
  LogCounts out;
  double total = kNegInf;
  for (std::int64_t c = count_min(w.lo, n); c <= count_max(w.hi, n); ++c) {
    const auto cu = static_cast<std::uint64_t>(c);
    const double rest = n == cu ? 0.0 : static_cast<double>(n - cu) * km1;
    total = log_add(total, log_binomial(n, cu) + rest);
  }
  if (w.a >= leaf.alphabet_size()) total = count_min(w.lo, n) == 0 ? static_cast<double>(n) * km1 : kNegInf;
  out.by_last = {total};
  return out;
}

// Dynamic program over (last symbol, number of a's) with window checks at
// the given positions. Full shifts collapse the last-symbol state.
LogCounts dp_counts(const System& leaf, Symbol a, std::uint64_t n,
                    const std::vector<std::pair<std::uint64_t, std::pair<double, double>>>& checks) {
  const int k = leaf.alphabet_size();
  const bool full = is_full(leaf);
  const std::size_t S = full ? 1 : static_cast<std::size_t>(k);
  const double cost = static_cast<double>(n) * static_cast<double>(n) * 0.5 * static_cast<double>(full ? 2 : k * k);
  if (cost > kDpBudget) throw BudgetExceeded("word-count dynamic program too large at n = " + std::to_string(n));
  const auto A = full ? std::vector<std::uint8_t>{} : leaf.adjacency();
  const auto K = static_cast<std::size_t>(k);
  const std::size_t C = static_cast<std::size_t>(n) + 1;
  std::vector<double> dp(S * C, 0.0), next(S * C, 0.0);
  const double others = static_cast<double>(a < k ? k - 1 : k);
  if (full) {
    dp[0] = a < k ? others : static_cast<double>(k);
    if (a < k) dp[1] = 1.0;
  } else {
    for (std::size_t b = 0; b < K; ++b) dp[b * C + (b == a ? 1 : 0)] = 1.0;
  }
  double scale = 0.0;
  std::size_t ci = 0;
  auto apply_checks = [&](std::uint64_t pos) {
    while (ci < checks.size() && checks[ci].first < pos) ++ci;
    for (std::size_t j = ci; j < checks.size() && checks[j].first == pos; ++j) {
      const std::int64_t lo = count_min(checks[j].second.first, pos);
      const std::int64_t hi = count_max(checks[j].second.second, pos);
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t c = 0; c <= pos; ++c) {
          const auto ic = static_cast<std::int64_t>(c);
          if (ic < lo || ic > hi) dp[s * C + c] = 0.0;
        }
      }
    }
  };
  apply_checks(1);
  for (std::uint64_t pos = 2; pos <= n; ++pos) {
    const std::size_t top = static_cast<std::size_t>(pos);
    for (std::size_t s = 0; s < S; ++s) std::fill(next.begin() + static_cast<std::ptrdiff_t>(s * C),
                                                   next.begin() + static_cast<std::ptrdiff_t>(s * C + top + 1), 0.0);
    if (full) {
      for (std::size_t c = 0; c < top; ++c) {
        const double v = dp[c];
        if (v == 0.0) continue;
        next[c] += v * others;
        if (a < k) next[c + 1] += v;
      }
    } else {
      for (std::size_t p = 0; p < K; ++p) {
        const double* src = dp.data() + p * C;
        for (std::size_t b = 0; b < K; ++b) {
          if (!A[p * K + b]) continue;
          double* dst = next.data() + b * C + (b == a ? 1 : 0);
          for (std::size_t c = 0; c < top; ++c) dst[c] += src[c];
        }
      }
    }
    std::swap(dp, next);
    apply_checks(pos);
    double m = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t c = 0; c <= top; ++c) m = std::max(m, dp[s * C + c]);
    }
    if (m == 0.0) {
      LogCounts empty;
      empty.by_last.assign(S, kNegInf);
      return empty;
    }
    if (m > 1e200 || m < 1e-200) {
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t c = 0; c <= top; ++c) dp[s * C + c] /= m;
      }
      scale += std::log(m);
    }
  }
  LogCounts out;
  out.by_last.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    double t = 0.0;
    for (std::size_t c = 0; c < C; ++c) t += dp[s * C + c];
    out.by_last[s] = t > 0.0 ? scale + std::log(t) : kNegInf;
  }
  return out;
}

LogCounts leaf_counts(const System& leaf, const ComponentPath& path, const SubsetSpec& Y, std::uint64_t n) {
  return std::visit(
      overloaded{[&](const WholeSpace&) { return transfer_counts(leaf, n); },
                 [&](const FrequencyWindow& w) {
                   if (is_full(leaf)) return binomial_counts(leaf, w, n);
                   return dp_counts(leaf, w.a, n, {{n, {w.lo, w.hi}}});
                 },
                 [&](const OscillationWindows& o) {
                   std::vector<std::pair<std::uint64_t, std::pair<double, double>>> checks;
                   for (const auto& w : o.windows) {
                     if (w.scale <= n) checks.push_back({w.scale, {w.lo, w.hi}});
                   }
                   std::sort(checks.begin(), checks.end());
                   return dp_counts(leaf, o.a, n, checks);
                 },
                 [&](const ComponentWindow& cw) {
                   const double frac = !path.empty() && path[0] == cw.c ? 1.0 : 0.0;
                   if (frac < cw.lo - 1e-12 || frac > cw.hi + 1e-12) {
                     LogCounts empty;
                     empty.by_last = {kNegInf};
                     return empty;
                   }
                   return transfer_counts(leaf, n);
                 },
                 [&](const SampleCloud&) -> LogCounts {
                   throw ValidationError("word counts need a predicate subset, not a sample cloud");
                 }},
      Y.kind());
}

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double LogCounts::total() const {
  double t = kNegInf;
  for (double v : by_last) t = log_add(t, v);
  return t;
}

SubsetSpec SubsetSpec::whole_space() { return SubsetSpec(WholeSpace{}); }

SubsetSpec SubsetSpec::frequency_window(Symbol a, double lo, double hi) {
  check_window(lo, hi);
  return SubsetSpec(FrequencyWindow{a, lo, hi});
}

SubsetSpec SubsetSpec::oscillation_windows(Symbol a, std::vector<OscillationWindow> windows) {
  for (const auto& w : windows) {
    check_window(w.lo, w.hi);
    require(w.scale >= 1, "oscillation scales must be >= 1");
  }
  return SubsetSpec(OscillationWindows{a, std::move(windows)});
}

SubsetSpec SubsetSpec::component_window(std::uint8_t c, double lo, double hi) {
  check_window(lo, hi);
  require(c <= 1, "component index must be 0 or 1");
  return SubsetSpec(ComponentWindow{c, lo, hi});
}

SubsetSpec SubsetSpec::sample_cloud(std::vector<PointGenerator> points, std::shared_ptr<const SubsetSpec> filter) {
  require(!points.empty(), "sample cloud must be nonempty");
  require(!filter || filter->is_predicate(), "sample cloud filter must be a predicate");
  return SubsetSpec(SampleCloud{std::move(points), std::move(filter)});
}

bool SubsetSpec::admits(std::span<const Symbol> word, const ComponentPath& path) const {
  auto freq_ok = [](std::size_t count, std::size_t n, double lo, double hi) {
    const auto c = static_cast<std::int64_t>(count);
    return c >= count_min(lo, n) && c <= count_max(hi, n);
  };
  return std::visit(
      overloaded{[](const WholeSpace&) { return true; },
                 [&](const FrequencyWindow& w) {
                   const auto c = static_cast<std::size_t>(std::count(word.begin(), word.end(), w.a));
                   return freq_ok(c, word.size(), w.lo, w.hi);
                 },
                 [&](const OscillationWindows& o) {
                   for (const auto& w : o.windows) {
                     if (w.scale > word.size()) continue;
                     const auto c = static_cast<std::size_t>(
                         std::count(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(w.scale), o.a));
                     if (!freq_ok(c, w.scale, w.lo, w.hi)) return false;
                   }
                   return true;
                 },
                 [&](const ComponentWindow& cw) {
                   const double frac = !path.empty() && path[0] == cw.c ? 1.0 : 0.0;
                   return frac >= cw.lo - 1e-12 && frac <= cw.hi + 1e-12;
                 },
                 [&](const SampleCloud& s) { return !s.filter || s.filter->admits(word, path); }},
      kind_);
}

std::string SubsetSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{[&](const WholeSpace&) { os << "whole_space"; },
                        [&](const FrequencyWindow& w) {
                          os << "frequency_window(" << int(w.a) << "," << w.lo << "," << w.hi << ")";
                        },
                        [&](const OscillationWindows& o) {
                          os << "oscillation_windows(" << int(o.a) << ",";
                          for (std::size_t i = 0; i < o.windows.size(); ++i) {
                            os << (i ? ";" : "") << o.windows[i].scale << ":" << o.windows[i].lo << "-" << o.windows[i].hi;
                          }
                          os << ")";
                        },
                        [&](const ComponentWindow& c) {
                          os << "component_window(" << int(c.c) << "," << c.lo << "," << c.hi << ")";
                        },
                        [&](const SampleCloud& s) {
                          os << "sample_cloud(" << s.points.size();
                          if (s.filter) os << "," << s.filter->describe();
                          os << ")";
                        }},
             kind_);
  return os.str();
}

std::vector<LogCounts> log_word_counts(const System& system, const SubsetSpec& Y, std::uint64_t n) {
  require(n >= 1, "word length must be >= 1");
  require(system.is_symbolic(), "word counts need a symbolic system");
  std::vector<LogCounts> out;
  for (const auto& path : system.leaf_paths()) {
    LogCounts c = leaf_counts(system.leaf(path), path, Y, n);
    c.path = path;
    out.push_back(std::move(c));
  }
  return out;
}

double log_word_count(const System& system, const SubsetSpec& Y, std::uint64_t n) {
  double t = kNegInf;
  for (const auto& c : log_word_counts(system, Y, n)) t = log_add(t, c.total());
  return t;
}

double brute_force_log_count(const System& system, const SubsetSpec& Y, int n, bool use_parallel) {
  require(n >= 1 && n <= 60, "enumeration length must be in [1, 60]");
  require(system.is_symbolic(), "enumeration needs a symbolic system");
  std::uint64_t total = 0;
  for (const auto& path : system.leaf_paths()) {
    const System& leaf = system.leaf(path);
    const int k = leaf.alphabet_size();
    if (std::pow(static_cast<double>(k), n) > static_cast<double>(kEnumBudget)) {
      throw BudgetExceeded("enumeration of " + std::to_string(k) + "^" + std::to_string(n) + " words exceeds the budget");
    }
    const auto adj = is_full(leaf) ? std::vector<std::uint8_t>{} : leaf.adjacency();
    auto pred = [&](std::span<const Symbol> w) { return Y.admits(w, path); };
    total += use_parallel ? kernels::count_words_parallel(k, n, adj, pred) : kernels::count_words_serial(k, n, adj, pred);
  }
  return total ? std::log(static_cast<double>(total)) : kNegInf;
}

double word_count_rate(const System& system, const SubsetSpec& Y, std::uint64_t n) {
  require(Y.is_predicate(), "word count rate needs a predicate subset");
  try {
    return log_word_count(system, Y, n) / static_cast<double>(n);
  } catch (const BudgetExceeded&) {
    if (n > 60) throw;
    return brute_force_log_count(system, Y, static_cast<int>(n)) / static_cast<double>(n);
  }
}

}  // namespace ergode
