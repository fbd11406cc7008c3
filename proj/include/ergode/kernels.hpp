#pragma once

// Data-parallel loops shared by the entropy, measure and Birkhoff code.
// Every kernel has a serial:: reference and a parallel:: OpenMP twin. Both
// reduce over the same fixed chunk partition and add the chunk partials in
// index order, so the parallel result is bit-identical to the serial one for
// any thread count.

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ergode/point.hpp"

namespace ergode::kernels {

inline constexpr std::uint64_t kChunk = 1u << 12;

inline std::uint64_t chunk_count(std::uint64_t n) { return (n + kChunk - 1) / kChunk; }

/// Decodes index `code` into a base-k word of length n, first symbol most significant.
inline void decode_word(std::uint64_t code, int k, std::span<Symbol> out) {
  if (k == 2) {
    for (std::size_t i = out.size(); i-- > 0; code >>= 1) out[i] = static_cast<Symbol>(code & 1);
    return;
  }
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<Symbol>(code % static_cast<std::uint64_t>(k));
    code /= static_cast<std::uint64_t>(k);
  }
}

namespace serial {

/// sum_{b<=i<e} f(i), one chunk's partial sum
template <class F>
double sum_range(std::uint64_t b, std::uint64_t e, F& f) {
  double part = 0.0;
  for (std::uint64_t i = b; i < e; ++i) part += f(i);
  return part;
}

template <class P>
std::uint64_t count_range(std::uint64_t b, std::uint64_t e, P& pred) {
  std::uint64_t total = 0;
  for (std::uint64_t i = b; i < e; ++i) total += pred(i) ? 1 : 0;
  return total;
}

/// sum_{i<n} f(i)
template <class F>
double sum(std::uint64_t n, F&& f) {
  const std::uint64_t chunks = chunk_count(n);
  double total = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) total += sum_range(c * kChunk, std::min(n, (c + 1) * kChunk), f);
  return total;
}

/// #{i < n : pred(i)}
template <class P>
std::uint64_t count(std::uint64_t n, P&& pred) {
  return count_range(0, n, pred);
}

}  // namespace serial

namespace parallel {

template <class F>
double sum(std::uint64_t n, F&& f) {
  const std::uint64_t chunks = chunk_count(n);
  if (chunks <= 1) return serial::sum(n, f);
  std::vector<double> parts(chunks, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto cu = static_cast<std::uint64_t>(c);
    parts[cu] = serial::sum_range(cu * kChunk, std::min(n, (cu + 1) * kChunk), f);
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

template <class P>
std::uint64_t count(std::uint64_t n, P&& pred) {
  const std::uint64_t chunks = chunk_count(n);
  if (chunks <= 1) return serial::count(n, pred);
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : total)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto cu = static_cast<std::uint64_t>(c);
    total += serial::count_range(cu * kChunk, std::min(n, (cu + 1) * kChunk), pred);
  }
  return total;
}

}  // namespace parallel

// ------------------------------------------------------------------ word loops

/// Shannon entropy -sum m log m over the k^n words of length n, `mass(word)`
/// giving each word's measure.
template <class Mass>
double word_entropy_serial(int k, int n, Mass&& mass) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(k);
  return serial::sum(total, [k, n, &mass](std::uint64_t code) {
    Symbol buf[64];
    decode_word(code, k, std::span<Symbol>(buf, static_cast<std::size_t>(n)));
    const double m = mass(std::span<const Symbol>(buf, static_cast<std::size_t>(n)));
    return m > 0.0 ? -m * std::log(m) : 0.0;
  });
}

template <class Mass>
double word_entropy_parallel(int k, int n, Mass&& mass) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(k);
  return parallel::sum(total, [k, n, &mass](std::uint64_t code) {
    Symbol buf[64];
    decode_word(code, k, std::span<Symbol>(buf, static_cast<std::size_t>(n)));
    const double m = mass(std::span<const Symbol>(buf, static_cast<std::size_t>(n)));
    return m > 0.0 ? -m * std::log(m) : 0.0;
  });
}

/// Number of length-n words admissible for the k x k adjacency (row-major,
/// empty = full shift) that satisfy `pred(word)`.
template <class Pred>
std::uint64_t count_words_serial(int k, int n, std::span<const std::uint8_t> adjacency, Pred&& pred) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(k);
  return serial::count(total, [k, n, adjacency, &pred](std::uint64_t code) {
    Symbol buf[64];
    std::span<Symbol> w(buf, static_cast<std::size_t>(n));
    decode_word(code, k, w);
    if (!adjacency.empty()) {
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (!adjacency[static_cast<std::size_t>(w[i - 1]) * static_cast<std::size_t>(k) + w[i]]) return false;
      }
    }
    return pred(std::span<const Symbol>(w));
  });
}

template <class Pred>
std::uint64_t count_words_parallel(int k, int n, std::span<const std::uint8_t> adjacency, Pred&& pred) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(k);
  return parallel::count(total, [k, n, adjacency, &pred](std::uint64_t code) {
    Symbol buf[64];
    std::span<Symbol> w(buf, static_cast<std::size_t>(n));
    decode_word(code, k, w);
    if (!adjacency.empty()) {
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (!adjacency[static_cast<std::size_t>(w[i - 1]) * static_cast<std::size_t>(k) + w[i]]) return false;
      }
    }
    return pred(std::span<const Symbol>(w));
  });
}

// ------------------------------------------------------------------ sums

/// sum_i values[i]
inline double birkhoff_sum_serial(std::span<const double> values) {
  return serial::sum(values.size(), [&](std::uint64_t i) { return values[i]; });
}
inline double birkhoff_sum_parallel(std::span<const double> values) {
  return parallel::sum(values.size(), [&](std::uint64_t i) { return values[i]; });
}

/// log sum_g exp(log_count[g] - alpha * n[g]), the grouped Caratheodory sum
/// in the log domain; groups with n = inf are skipped.
inline double log_caratheodory_serial(std::span<const double> log_count, std::span<const double> n, double alpha) {
  double hi = -INFINITY;
  for (std::size_t g = 0; g < n.size(); ++g) {
    if (std::isfinite(n[g])) hi = std::max(hi, log_count[g] - alpha * n[g]);
  }
  if (!std::isfinite(hi)) return -INFINITY;
  const double s = serial::sum(n.size(), [&](std::uint64_t g) {
    return std::isfinite(n[g]) ? std::exp(log_count[g] - alpha * n[g] - hi) : 0.0;
  });
  return hi + std::log(s);
}

inline double log_caratheodory_parallel(std::span<const double> log_count, std::span<const double> n, double alpha) {
  double hi = -INFINITY;
  for (std::size_t g = 0; g < n.size(); ++g) {
    if (std::isfinite(n[g])) hi = std::max(hi, log_count[g] - alpha * n[g]);
  }
  if (!std::isfinite(hi)) return -INFINITY;
  const double s = parallel::sum(n.size(), [&](std::uint64_t g) {
    return std::isfinite(n[g]) ? std::exp(log_count[g] - alpha * n[g] - hi) : 0.0;
  });
  return hi + std::log(s);
}

}  // namespace ergode::kernels
