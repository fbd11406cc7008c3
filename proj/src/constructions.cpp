#include "ergode/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ergode/errors.hpp"

namespace ergode {

namespace {

struct Chain {
  int k = 2;
  std::vector<double> P;  // row-major
  std::vector<double> pi;
  double p(int a, int b) const { return P[static_cast<std::size_t>(a * k + b)]; }
};

Chain chain_of(const Measure& mu) {
  Chain c;
  if (const auto* b = mu.as<Bernoulli>()) {
    c.k = static_cast<int>(b->probs.size());
    c.pi = b->probs;
    for (int a = 0; a < c.k; ++a) c.P.insert(c.P.end(), b->probs.begin(), b->probs.end());
    return c;
  }
  if (const auto* m = mu.as<Markov>()) {
    c.k = m->k;
    c.P = m->P;
    c.pi = m->pi;
    return c;
  }
  throw ValidationError("generic points need an ergodic Bernoulli or Markov measure, got " + mu.describe());
}

// from -> c_0 -> ... -> c_{r-1} -> to with exactly r intermediate symbols.
std::optional<Word> path_exact(const System& sys, Symbol from, Symbol to, std::size_t r) {
  const auto k = static_cast<std::size_t>(sys.alphabet_size());
  if (r == 0) return sys.allowed(from, to) ? std::optional<Word>(Word{}) : std::nullopt;
  // parent[i][c]: predecessor of c_i = c on some path, -1 if unreachable
  std::vector<std::vector<int>> parent(r, std::vector<int>(k, -1));
  for (std::size_t c = 0; c < k; ++c) {
    if (sys.allowed(from, static_cast<Symbol>(c))) parent[0][c] = from;
  }
  for (std::size_t i = 1; i < r; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      if (parent[i - 1][a] < 0) continue;
      for (std::size_t c = 0; c < k; ++c) {
        if (parent[i][c] < 0 && sys.allowed(static_cast<Symbol>(a), static_cast<Symbol>(c))) parent[i][c] = static_cast<int>(a);
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (parent[r - 1][c] < 0 || !sys.allowed(static_cast<Symbol>(c), to)) continue;
    Word path(r);
    int cur = static_cast<int>(c);
    for (std::size_t i = r; i-- > 0;) {
      path[i] = static_cast<Symbol>(cur);
      cur = parent[i][static_cast<std::size_t>(cur)];
    }
    return path;
  }
  return std::nullopt;
}

// Shortest connector from `from` to `to`, at most max_len symbols.
std::optional<Word> connector(const System& sys, Symbol from, Symbol to, std::size_t max_len) {
  for (std::size_t r = 0; r <= max_len; ++r) {
    if (auto p = path_exact(sys, from, to, r)) return p;
  }
  return std::nullopt;
}

System support_system(const Chain& c) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(c.k), std::vector<int>(static_cast<std::size_t>(c.k), 0));
  for (int a = 0; a < c.k; ++a) {
    for (int b = 0; b < c.k; ++b) adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = c.p(a, b) > 0.0;
  }
  return System::markov_shift(adj);
}

struct Weighted {
  Word word;
  double mass;
};

// Positive-mass words of length L, or empty when there are more than `cap`.
std::vector<Weighted> words_of(const Chain& c, int L, std::size_t cap) {
  std::vector<Weighted> out;
  Word w;
  bool overflow = false;
  auto rec = [&](auto&& self, double mass) -> void {
    if (overflow) return;
    if (static_cast<int>(w.size()) == L) {
      out.push_back({w, mass});
      if (out.size() > cap) overflow = true;
      return;
    }
    for (int b = 0; b < c.k; ++b) {
      const double m = w.empty() ? c.pi[static_cast<std::size_t>(b)] : mass * c.p(w.back(), b);
      if (m <= 0.0) continue;
      w.push_back(static_cast<Symbol>(b));
      self(self, m);
      w.pop_back();
    }
  };
  rec(rec, 1.0);
  if (overflow) out.clear();
  return out;
}

// One level: M = T / L words of length L with largest-remainder
// multiplicities, chained with a rotor-router on P between words.
Word build_level(const Chain& c, std::uint64_t T, int& prev, std::mt19937_64& rng) {
  int L = 1;
  std::vector<Weighted> best = words_of(c, 1, 1 << 20);
  for (int cand = 2; cand <= 24; ++cand) {
    auto ws = words_of(c, cand, static_cast<std::size_t>(T / (4 * static_cast<std::uint64_t>(cand))));
    if (ws.empty() || static_cast<std::uint64_t>(cand) * 4 * ws.size() > T) break;
    L = cand;
    best = std::move(ws);
  }
  const std::uint64_t M = std::max<std::uint64_t>(1, T / static_cast<std::uint64_t>(L));
  std::vector<std::uint64_t> mult(best.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < best.size(); ++i) {
    const double target = static_cast<double>(M) * best[i].mass;
    mult[i] = static_cast<std::uint64_t>(std::floor(target));
    used += mult[i];
    rem.push_back({target - static_cast<double>(mult[i]), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < M && i < rem.size(); ++i, ++used) ++mult[rem[i].second];

  std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(c.k));
  for (std::size_t i = 0; i < best.size(); ++i) {
    for (std::uint64_t m = 0; m < mult[i]; ++m) pools[best[i].word[0]].push_back(i);
  }
  for (auto& p : pools) std::shuffle(p.begin(), p.end(), rng);

  std::vector<double> visits(static_cast<std::size_t>(c.k), 0.0);
  std::vector<double> taken(static_cast<std::size_t>(c.k * c.k), 0.0);
  Word out;
  out.reserve(static_cast<std::size_t>(M) * static_cast<std::size_t>(L));
  for (;;) {
    int pick = -1;
    if (prev < 0) {
      std::size_t most = 0;
      for (int b = 0; b < c.k; ++b) {
        if (pools[static_cast<std::size_t>(b)].size() > most) {
          most = pools[static_cast<std::size_t>(b)].size();
          pick = b;
        }
      }
    } else {
      double best_score = -INFINITY;
      for (int b = 0; b < c.k; ++b) {
        if (c.p(prev, b) <= 0.0 || pools[static_cast<std::size_t>(b)].empty()) continue;
        const double score = c.p(prev, b) * (visits[static_cast<std::size_t>(prev)] + 1.0) -
                             taken[static_cast<std::size_t>(prev * c.k + b)];
        if (score > best_score) {
          best_score = score;
          pick = b;
        }
      }
      if (pick >= 0) {
        visits[static_cast<std::size_t>(prev)] += 1.0;
        taken[static_cast<std::size_t>(prev * c.k + pick)] += 1.0;
      }
    }
    if (pick < 0) break;
    auto& pool = pools[static_cast<std::size_t>(pick)];
    const Word& w = best[pool.back()].word;
    pool.pop_back();
    out.insert(out.end(), w.begin(), w.end());
    prev = w.back();
  }
  return out;
}

Word balanced_pattern(double tau, Symbol a, Symbol other) {
  constexpr std::int64_t q0 = 1000;
  std::int64_t num = std::llround(tau * q0);
  std::int64_t q = q0;
  const std::int64_t g = std::gcd(num, q);
  if (g > 0) {
    num /= g;
    q /= g;
  }
  Word w(static_cast<std::size_t>(q));
  for (std::int64_t i = 0; i < q; ++i) {
    const bool hit = ((i + 1) * num) / q - (i * num) / q == 1;
    w[static_cast<std::size_t>(i)] = hit ? a : other;
  }
  return w;
}

double pattern_frequency(const Word& w, Symbol a) {
  return static_cast<double>(std::count(w.begin(), w.end(), a)) / static_cast<double>(w.size());
}

}  // namespace

GenericPoint generic_point(const Measure& mu, GenericMode mode, std::uint64_t horizon, std::uint64_t seed) {
  require(horizon >= 1, "horizon must be >= 1");
  const Measure* inner = &mu;
  std::optional<ComponentPath> path;
  if (const auto* oc = mu.as<OnComponent>()) {
    inner = oc->inner.get();
    path = ComponentPath{oc->c};
  }
  const Chain c = chain_of(*inner);
  auto place = [&](PointGenerator p) { return path ? p.with_component(*path) : p; };
  for (int a = 0; a < c.k; ++a) {
    if (c.pi[static_cast<std::size_t>(a)] == 1.0 && c.p(a, a) == 1.0) {
      return {place(PointGenerator::explicit_word({static_cast<Symbol>(a)})), false};
    }
  }
  if (mode == GenericMode::SeededIid) {
    if (inner->as<Bernoulli>()) return {place(PointGenerator::seeded_iid(seed, c.pi)), true};
    const System sup = support_system(c);
    Word w;
    w.reserve(static_cast<std::size_t>(horizon));
    auto draw = [&](const double* row, std::uint64_t i) {
      const double u = counter_uniform(seed, i);
      double acc = 0.0;
      int last = 0;
      for (int b = 0; b < c.k; ++b) {
        if (row[b] <= 0.0) continue;
        last = b;
        acc += row[b];
        if (u < acc) return static_cast<Symbol>(b);
      }
      return static_cast<Symbol>(last);
    };
    w.push_back(draw(c.pi.data(), 0));
    for (std::uint64_t i = 1; i < horizon; ++i) w.push_back(draw(c.P.data() + w.back() * c.k, i));
    // close the period so the repetition stays admissible
    if (auto tail = connector(sup, w.back(), w.front(), static_cast<std::size_t>(c.k))) w.insert(w.end(), tail->begin(), tail->end());
    return {place(PointGenerator::explicit_word(std::move(w))), true};
  }
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t t = horizon / 2; t >= 64; t /= 2) sizes.push_back(t);
  if (sizes.empty()) sizes.push_back(std::max<std::uint64_t>(horizon, 16));
  std::reverse(sizes.begin(), sizes.end());
  std::mt19937_64 rng(seed);
  int prev = -1;
  std::vector<Block> blocks;
  for (std::uint64_t T : sizes) {
    Word level = build_level(c, T, prev, rng);
    if (level.empty()) continue;
    const auto len = static_cast<std::uint64_t>(level.size());
    blocks.push_back({std::move(level), len});
  }
  return {place(PointGenerator::block_schedule(std::move(blocks))), false};
}

PointGenerator irregular_point(const System& system, const Observable& phi, double target_lo, double target_hi,
                               double ratio, std::uint64_t horizon, std::uint64_t first_block) {
  const auto* fs = system.as<FullShift>();
  if (!fs) throw Unsupported("irregular points are built on full shifts");
  const auto* sf = phi.as<SymbolFrequency>();
  if (!sf) throw Unsupported("irregular points target a symbol-frequency observable");
  require(static_cast<int>(sf->a) < fs->k, "observable symbol outside the alphabet");
  require(target_lo <= target_hi, "need target_lo <= target_hi");
  const double lo_ok = fs->k == 1 ? 1.0 : 0.0;
  require(target_lo >= lo_ok && target_hi <= 1.0, "targets are not realizable symbol frequencies");
  require(ratio >= 2.0, "ratio must be >= 2");
  require(first_block >= 1, "first block must be >= 1");
  const Symbol other = sf->a == 0 ? 1 : 0;
  const Word plo = balanced_pattern(target_lo, sf->a, other);
  const Word phi_pat = balanced_pattern(target_hi, sf->a, other);
  if (target_lo == target_hi) return PointGenerator::block_schedule({{plo, static_cast<std::uint64_t>(plo.size())}});
  std::vector<Block> blocks;
  std::uint64_t total = first_block;
  blocks.push_back({plo, first_block});
  bool high = true;
  while (total < horizon) {
    const auto len = static_cast<std::uint64_t>(std::llround((ratio - 1.0) * static_cast<double>(total)));
    blocks.push_back({high ? phi_pat : plo, len});
    total += len;
    high = !high;
  }
  return PointGenerator::block_schedule(std::move(blocks));
}

SubsetSpec oscillation_windows_for(const PointGenerator& x, Symbol a, double eta, std::uint64_t max_scale) {
  require(x.is_symbolic() && x.offset() == 0, "oscillation windows need an unshifted symbolic point");
  const auto* bs = std::get_if<BlockScheduleRule>(&x.rule());
  require(bs != nullptr, "oscillation windows follow a block schedule");
  require(eta >= 0.0, "eta must be >= 0");
  std::vector<OscillationWindow> windows;
  std::uint64_t pos = 0, count = 0;
  for (std::size_t i = 0; i + 1 < bs->blocks.size(); ++i) {
    const Block& b = bs->blocks[i];
    if (pos + b.length > max_scale) break;
    const auto per = static_cast<std::uint64_t>(std::count(b.pattern.begin(), b.pattern.end(), a));
    const std::uint64_t full = b.length / b.pattern.size();
    const auto rest = static_cast<std::ptrdiff_t>(b.length % b.pattern.size());
    count += full * per + static_cast<std::uint64_t>(std::count(b.pattern.begin(), b.pattern.begin() + rest, a));
    pos += b.length;
    const double f = static_cast<double>(count) / static_cast<double>(pos);
    const double pf = pattern_frequency(b.pattern, a);
    if (pf < f)
      windows.push_back({pos, 0.0, f + eta});
    else if (pf > f)
      windows.push_back({pos, f - eta, 1.0});
    else
      windows.push_back({pos, f - eta, f + eta});
  }
  return SubsetSpec::oscillation_windows(a, std::move(windows));
}

MistakeFunction MistakeFunction::zero() { return MistakeFunction{}; }

namespace {
void check_table(const std::vector<std::pair<double, double>>& t, double eps0) {
  require(!t.empty(), "c(eps) table must be nonempty");
  require(eps0 > 0.0, "eps0 must be > 0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i].first > 0.0 && t[i].second > 0.0, "c(eps) table needs positive entries");
    if (i) {
      require(t[i].first > t[i - 1].first, "c(eps) grid must be increasing");
      require(t[i].second <= t[i - 1].second, "c(eps) must be nonincreasing in eps");
    }
  }
}
}  // namespace

MistakeFunction MistakeFunction::power_law(double beta, std::vector<std::pair<double, double>> c_table, double eps0) {
  require(beta >= 0.0 && beta < 1.0, "power-law exponent must lie in [0, 1)");
  check_table(c_table, eps0);
  MistakeFunction g;
  g.form_ = Form::PowerLaw;
  g.beta_ = beta;
  g.table_ = std::move(c_table);
  g.eps0_ = eps0;
  return g;
}

MistakeFunction MistakeFunction::log_law(std::vector<std::pair<double, double>> c_table, double eps0) {
  check_table(c_table, eps0);
  MistakeFunction g;
  g.form_ = Form::LogLaw;
  g.table_ = std::move(c_table);
  g.eps0_ = eps0;
  return g;
}

double MistakeFunction::c(double eps) const {
  if (form_ == Form::Zero) return 0.0;
  const double e = std::min(eps, eps0_);
  double v = table_.front().second;
  for (const auto& [grid, value] : table_) {
    if (grid <= e) v = value;
  }
  return v;
}

double MistakeFunction::operator()(double t, double eps) const {
  require(t >= 0.0, "mistake functions take t >= 0");
  switch (form_) {
    case Form::Zero:
      return 0.0;
    case Form::PowerLaw:
      return c(eps) * std::pow(t, beta_);
    case Form::LogLaw:
      return c(eps) * std::log1p(t);
  }
  return 0.0;
}

std::string MistakeFunction::describe() const {
  std::ostringstream os;
  switch (form_) {
    case Form::Zero:
      return "zero";
    case Form::PowerLaw:
      os << "power_law(beta=" << beta_ << ",eps0=" << eps0_ << ")";
      break;
    case Form::LogLaw:
      os << "log_law(eps0=" << eps0_ << ")";
      break;
  }
  return os.str();
}

namespace {

// Number of extra symbols a symbolic distance looks ahead before it can
// reach eps: d = 2^-m >= eps iff the first disagreement m <= K.
std::int64_t lookahead(double eps) {
  if (eps > 1.0) return -1;  // never reached
  return static_cast<std::int64_t>(std::floor(std::log2(1.0 / eps) + 1e-12));
}

Membership finish(double mistakes, double T, const MistakeFunction& g, double eps) {
  Membership m;
  m.mistakes = mistakes;
  m.budget = g(T, eps);
  m.member = mistakes <= m.budget + 1e-12;
  m.density = T > 0 ? mistakes / T : 0.0;
  return m;
}

}  // namespace

Membership mistake_ball_membership(const MapDynamics& dyn, const PointGenerator& x, const PointGenerator& y,
                                   std::uint64_t T, const MistakeFunction& g, double eps) {
  require(T >= 1, "T must be >= 1");
  require(eps > 0.0, "eps must be > 0");
  const System* sys = std::get_if<System>(&dyn);
  if (sys && sys->is_symbolic() && x.is_symbolic() && y.is_symbolic()) {
    const std::int64_t K = lookahead(eps);
    if (K < 0) return finish(0.0, static_cast<double>(T), g, eps);
    if (x.component() != y.component()) return finish(static_cast<double>(T), static_cast<double>(T), g, eps);
    const std::uint64_t span = T + static_cast<std::uint64_t>(K);
    // next disagreement at or after i, scanned backwards
    Word a(static_cast<std::size_t>(span)), b(static_cast<std::size_t>(span));
    x.symbols(0, a);
    y.symbols(0, b);
    std::uint64_t next = kUnbounded;
    std::uint64_t count = 0;
    for (std::uint64_t i = span; i-- > 0;) {
      if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)]) next = i;
      if (i < T && next != kUnbounded && next - i <= static_cast<std::uint64_t>(K)) ++count;
    }
    return finish(static_cast<double>(count), static_cast<double>(T), g, eps);
  }
  const MetricSpec metric =
      sys ? MetricSpec::of(*sys) : MetricSpec::of(*std::get<TimeMap>(dyn).flow);
  PointGenerator p = x, q = y;
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < T; ++i) {
    if (distance(metric, p, q, 64).value >= eps) ++count;
    p = step(dyn, p);
    q = step(dyn, q);
  }
  return finish(static_cast<double>(count), static_cast<double>(T), g, eps);
}

Membership mistake_ball_membership(const Flow& flow, const PointGenerator& x, const PointGenerator& y, double T,
                                   const MistakeFunction& g, double eps, double step_size) {
  require(T > 0.0 && step_size > 0.0 && eps > 0.0, "need T, step and eps > 0");
  if (const auto* s = flow.as<Suspension>()) {
    require(step_size <= s->roof.min() / 4.0 + 1e-15, "flow step must be <= roof_min / 4");
  }
  const MetricSpec metric = MetricSpec::of(flow);
  std::uint64_t count = 0;
  const auto n = static_cast<std::uint64_t>(std::ceil(T / step_size));
  for (std::uint64_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * step_size;
    if (t >= T) break;
    if (distance(metric, time_t_map(flow, t, x), time_t_map(flow, t, y), 64).value >= eps) ++count;
  }
  return finish(step_size * static_cast<double>(count), T, g, eps);
}

std::uint64_t gluing_overhead(const System& system, double eps) {
  require(system.is_symbolic() && !system.as<DisjointUnion>(), "gluing needs a full or Markov shift");
  const std::int64_t K = std::max<std::int64_t>(0, lookahead(eps));
  std::size_t rmax = 0;
  const int k = system.alphabet_size();
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const auto c = connector(system, static_cast<Symbol>(a), static_cast<Symbol>(b), static_cast<std::size_t>(k));
      if (c) rmax = std::max(rmax, c->size());
    }
  }
  return rmax + static_cast<std::uint64_t>(K);
}

double declared_T_g(const System& system, const MistakeFunction& g, double eps) {
  const auto need = static_cast<double>(gluing_overhead(system, eps));
  if (need == 0.0) return 1.0;
  if (g.form() == MistakeFunction::Form::Zero) return INFINITY;
  double hi = 1.0;
  while (g(hi, eps) < need) {
    hi *= 2.0;
    if (hi > 1e18) return INFINITY;
  }
  double lo = std::floor(hi / 2.0);
  while (hi - lo > 1.0) {
    const double mid = std::floor((lo + hi) / 2.0);
    if (g(mid, eps) >= need)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

GlueResult glue_orbits(const System& system, const std::vector<OrbitSpecSegment>& segments, const MistakeFunction& g,
                       std::size_t max_connector) {
  require(!segments.empty(), "need at least one segment");
  require(system.as<FullShift>() || system.as<MarkovShift>(), "gluing needs a full or Markov shift");
  GlueResult out;
  std::vector<Block> blocks;
  std::vector<std::uint64_t> lengths;
  Word prev_word;
  std::uint64_t pos = 0;
  for (const auto& seg : segments) {
    require(seg.target.is_symbolic(), "segment targets must be symbolic");
    require(seg.eps > 0.0, "segment eps must be > 0");
    const auto n = static_cast<std::uint64_t>(std::llround(seg.duration));
    require(n >= 1, "segment durations must be >= 1");
    const double Tg = declared_T_g(system, g, seg.eps);
    if (static_cast<double>(n) < Tg) {
      throw ValidationError("segment duration " + std::to_string(n) + " below T_g(eps) = " + std::to_string(Tg));
    }
    Word w = seg.target.prefix(static_cast<std::size_t>(n));
    std::size_t r = 0;
    if (!prev_word.empty()) {
      std::optional<Word> conn;
      for (r = 0; r < w.size() && r <= max_connector; ++r) {
        conn = path_exact(system, prev_word.back(), w[r], r);
        if (conn) break;
      }
      if (!conn) throw ValidationError("no connector of length <= " + std::to_string(max_connector) + " found");
      std::copy(conn->begin(), conn->end(), w.begin());
    }
    out.starts.push_back(pos);
    out.connector_lengths.push_back(r);
    pos += n;
    lengths.push_back(n);
    blocks.push_back({w, n});
    prev_word = std::move(w);
  }
  // a cycle through the last symbol keeps the tail admissible
  const Symbol last = prev_word.back();
  Word cycle{last};
  if (!system.allowed(last, last)) {
    if (auto c = connector(system, last, last, static_cast<std::size_t>(system.alphabet_size()))) {
      cycle = *c;
      cycle.push_back(last);
    }
  }
  blocks.push_back({cycle, static_cast<std::uint64_t>(cycle.size())});
  out.point = PointGenerator::block_schedule(std::move(blocks));
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const Membership m =
        mistake_ball_membership(system, out.point.shifted(out.starts[j]), segments[j].target, lengths[j], g, segments[j].eps);
    out.checks.push_back(m);
    if (!m.member) throw ValidationError("glued segment " + std::to_string(j) + " leaves its mistake ball");
  }
  return out;
}

Counterexample build_counterexample_system() {
  System sys = System::disjoint_union(System::full_shift(2), System::full_shift(2));
  Flow flow = Flow::suspension(sys, RoofFunction::constant(1.0));
  const Measure fair = Measure::bernoulli({0.5, 0.5});
  Measure mu = Measure::mixture({{Measure::on_component(0, fair), 0.5}, {Measure::on_component(1, fair), 0.5}});
  Measure mu_flow = time_average_measure(flow, mu);
  return {std::move(sys), std::move(flow), std::move(mu), std::move(mu_flow)};
}

}  // namespace ergode
