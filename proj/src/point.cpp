#include "ergode/point.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergode/errors.hpp"

namespace ergode {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct PointGenerator::Source {
  SymbolRule rule;
  std::vector<double> cdf;            // iid
  std::vector<std::uint64_t> starts;  // block schedule
  std::uint64_t total = 0;            // block schedule / explicit word length

  Symbol at(std::uint64_t i) const {
    return std::visit(
        [&](const auto& r) -> Symbol {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, ExplicitWordRule>) {
            return r.symbols[i % r.symbols.size()];
          } else if constexpr (std::is_same_v<R, SeededIidRule>) {
            const double u = counter_uniform(r.seed, i);
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto s = static_cast<std::size_t>(it - cdf.begin());
            return static_cast<Symbol>(std::min(s, cdf.size() - 1));
          } else {
            const auto it = std::upper_bound(starts.begin(), starts.end(), i);
            const std::size_t b = static_cast<std::size_t>(it - starts.begin()) - 1;
            const Word& p = r.blocks[b].pattern;
            return p[(i - starts[b]) % p.size()];
          }
        },
        rule);
  }

  void fill(std::uint64_t start, std::span<Symbol> out) const {
    if (const auto* bs = std::get_if<BlockScheduleRule>(&rule)) {
      auto it = std::upper_bound(starts.begin(), starts.end(), start);
      std::size_t b = static_cast<std::size_t>(it - starts.begin()) - 1;
      std::uint64_t pos = start;
      std::size_t k = 0;
      while (k < out.size()) {
        const Block& blk = bs->blocks[b];
        const bool last = b + 1 == bs->blocks.size();
        const std::uint64_t end = last ? kUnbounded : starts[b + 1];
        const std::size_t plen = blk.pattern.size();
        std::size_t ph = static_cast<std::size_t>((pos - starts[b]) % plen);
        while (k < out.size() && pos < end) {
          out[k++] = blk.pattern[ph];
          if (++ph == plen) ph = 0;
          ++pos;
        }
        if (!last) ++b;
      }
      return;
    }
    if (const auto* ew = std::get_if<ExplicitWordRule>(&rule)) {
      const std::size_t len = ew->symbols.size();
      std::size_t ph = static_cast<std::size_t>(start % len);
      for (auto& s : out) {
        s = ew->symbols[ph];
        if (++ph == len) ph = 0;
      }
      return;
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(start + k);
  }
};

PointGenerator PointGenerator::explicit_word(Word symbols) {
  require(!symbols.empty(), "explicit word must be nonempty");
  auto src = std::make_shared<Source>();
  src->total = symbols.size();
  src->rule = ExplicitWordRule{std::move(symbols)};
  PointGenerator p;
  p.source_ = std::move(src);
  return p;
}

PointGenerator PointGenerator::seeded_iid(std::uint64_t seed, std::vector<double> probs) {
  require(!probs.empty() && probs.size() <= 256, "iid probabilities must list 1..256 symbols");
  double total = 0.0;
  for (double q : probs) {
    require(q >= 0.0 && std::isfinite(q), "iid probabilities must be nonnegative");
    total += q;
  }
  require(std::abs(total - 1.0) <= 1e-12, "iid probabilities must sum to 1");
  auto src = std::make_shared<Source>();
  src->cdf.resize(probs.size());
  std::partial_sum(probs.begin(), probs.end(), src->cdf.begin());
  src->cdf.back() = 1.0;
  src->total = kUnbounded;
  src->rule = SeededIidRule{seed, std::move(probs)};
  PointGenerator p;
  p.source_ = std::move(src);
  return p;
}

PointGenerator PointGenerator::block_schedule(std::vector<Block> blocks) {
  require(!blocks.empty(), "block schedule must have at least one block");
  auto src = std::make_shared<Source>();
  std::uint64_t pos = 0;
  for (const auto& b : blocks) {
    require(!b.pattern.empty() && b.length > 0, "blocks need a nonempty pattern and positive length");
    src->starts.push_back(pos);
    pos += b.length;
  }
  src->total = pos;
  src->rule = BlockScheduleRule{std::move(blocks)};
  PointGenerator p;
  p.source_ = std::move(src);
  return p;
}

PointGenerator PointGenerator::coordinate(std::vector<double> coords) {
  require(!coords.empty(), "coordinate point needs at least one coordinate");
  PointGenerator p;
  p.coords_ = std::move(coords);
  return p;
}

const SymbolRule& PointGenerator::rule() const {
  require(source_ != nullptr, "point has no symbol rule");
  return source_->rule;
}

Symbol PointGenerator::symbol_at(std::uint64_t i) const {
  require(source_ != nullptr, "symbol requested from a coordinate point");
  return source_->at(offset_ + i);
}

void PointGenerator::symbols(std::uint64_t start, std::span<Symbol> out) const {
  require(source_ != nullptr, "symbols requested from a coordinate point");
  source_->fill(offset_ + start, out);
}

Word PointGenerator::prefix(std::size_t n) const {
  Word w(n);
  symbols(0, w);
  return w;
}

std::uint64_t PointGenerator::materialized_length() const {
  if (!source_) return kUnbounded;
  if (std::holds_alternative<SeededIidRule>(source_->rule)) return kUnbounded;
  if (std::holds_alternative<ExplicitWordRule>(source_->rule)) return kUnbounded;  // periodic by definition
  return source_->total > offset_ ? source_->total - offset_ : 0;
}

double PointGenerator::circle_coordinate() const {
  if (!source_) return coords_.at(0);
  require(digit_base_ >= 2, "symbolic point has no digit base for a circle coordinate");
  const double inv = 1.0 / digit_base_;
  const int digits = static_cast<int>(std::ceil(60.0 / std::log2(static_cast<double>(digit_base_))));
  Word w(static_cast<std::size_t>(digits));
  symbols(0, w);
  double x = 0.0;
  for (int i = digits - 1; i >= 0; --i) x = (x + w[static_cast<std::size_t>(i)]) * inv;
  return x - std::floor(x);
}

PointGenerator PointGenerator::shifted(std::uint64_t steps) const {
  PointGenerator p = *this;
  p.offset_ += steps;
  return p;
}

PointGenerator PointGenerator::with_coords(std::vector<double> coords) const {
  PointGenerator p = *this;
  p.coords_ = std::move(coords);
  return p;
}

PointGenerator PointGenerator::with_component(ComponentPath path) const {
  PointGenerator p = *this;
  p.component_ = std::move(path);
  return p;
}

PointGenerator PointGenerator::with_fiber(std::optional<double> fiber) const {
  PointGenerator p = *this;
  p.fiber_ = fiber;
  return p;
}

PointGenerator PointGenerator::with_digit_base(std::uint32_t base) const {
  PointGenerator p = *this;
  p.digit_base_ = base;
  return p;
}

bool same_point(const PointGenerator& a, const PointGenerator& b, std::size_t horizon) {
  if (a.is_symbolic() != b.is_symbolic()) return false;
  if (a.component() != b.component()) return false;
  if (a.fiber().has_value() != b.fiber().has_value()) return false;
  if (a.fiber() && std::abs(*a.fiber() - *b.fiber()) > 1e-12) return false;
  if (a.is_symbolic()) return a.prefix(horizon) == b.prefix(horizon);
  if (a.coords().size() != b.coords().size()) return false;
  for (std::size_t i = 0; i < a.coords().size(); ++i) {
    double d = std::abs(a.coords()[i] - b.coords()[i]);
    d = std::min(d, 1.0 - d);
    if (d > 1e-12) return false;
  }
  return true;
}

}  // namespace ergode
