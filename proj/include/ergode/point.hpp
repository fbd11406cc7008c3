#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ergode {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;
using ComponentPath = std::vector<std::uint8_t>;

inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

/// A run of `length` symbols filled by repeating `pattern` from its start.
struct Block {
  Word pattern;
  std::uint64_t length = 0;
};

struct ExplicitWordRule {
  Word symbols;  // repeated periodically
};

struct SeededIidRule {
  std::uint64_t seed = 0;
  std::vector<double> probs;
};

struct BlockScheduleRule {
  std::vector<Block> blocks;  // after the last block, its pattern keeps repeating
};

using SymbolRule = std::variant<ExplicitWordRule, SeededIidRule, BlockScheduleRule>;

/// Forward orbit data of a point as a lazy, indexable, immutable stream.
///
/// Symbolic points expose `symbol_at(i)` for every i >= 0; coordinate points
/// carry a real vector. A point may additionally carry a disjoint-union
/// component path and a fiber height when it lives in a suspension space.
/// Copies share the underlying rule.
class PointGenerator {
 public:
  static PointGenerator explicit_word(Word symbols);
  static PointGenerator seeded_iid(std::uint64_t seed, std::vector<double> probs);
  static PointGenerator block_schedule(std::vector<Block> blocks);
  static PointGenerator coordinate(std::vector<double> coords);

  bool is_symbolic() const { return source_ != nullptr; }
  const SymbolRule& rule() const;

  Symbol symbol_at(std::uint64_t i) const;
  /// Fills `out` with symbols start, start+1, ... (relative to the current offset).
  void symbols(std::uint64_t start, std::span<Symbol> out) const;
  Word prefix(std::size_t n) const;

  /// Number of symbols (from the current position) defined by the rule
  /// itself rather than its periodic extension; kUnbounded for iid streams.
  std::uint64_t materialized_length() const;
  bool truncated_at(std::uint64_t horizon) const { return horizon > materialized_length(); }

  std::uint64_t offset() const { return offset_; }
  const std::vector<double>& coords() const { return coords_; }
  const ComponentPath& component() const { return component_; }
  std::optional<double> fiber() const { return fiber_; }
  /// Base n of the digit expansion x = sum d_i n^-(i+1) when a symbolic
  /// point stands for a circle point; 0 otherwise.
  std::uint32_t digit_base() const { return digit_base_; }

  /// Circle coordinate: the stored coordinate or the digit expansion value.
  double circle_coordinate() const;

  PointGenerator shifted(std::uint64_t steps) const;
  PointGenerator with_coords(std::vector<double> coords) const;
  PointGenerator with_component(ComponentPath path) const;
  PointGenerator with_fiber(std::optional<double> fiber) const;
  PointGenerator with_digit_base(std::uint32_t base) const;

 private:
  struct Source;
  std::shared_ptr<const Source> source_;
  std::uint64_t offset_ = 0;
  std::vector<double> coords_;
  ComponentPath component_;
  std::optional<double> fiber_;
  std::uint32_t digit_base_ = 0;
};

/// Equality up to a symbolic horizon (and 1e-12 on coordinates/fibers).
bool same_point(const PointGenerator& a, const PointGenerator& b, std::size_t horizon = 64);

/// Counter-based uniform variate in [0, 1), deterministic in (seed, index).
double counter_uniform(std::uint64_t seed, std::uint64_t index);

}  // namespace ergode
