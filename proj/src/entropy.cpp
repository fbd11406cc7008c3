#include "ergode/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
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

constexpr double kInf = INFINITY;

CoverElement finish(CoverBody body, double N, double unc = 0.0) {
  CoverElement e;
  e.body = std::move(body);
  e.N = N;
  e.D = std::isinf(N) ? 0.0 : std::exp(-N);
  e.N_uncertainty = unc;
  return e;
}

// Steps a cylinder ending in `last` stays inside one 1-cylinder past its
// length: each symbol with a single successor forces one more.
double forced_steps(const System& leaf, Symbol last) {
  if (leaf.as<FullShift>()) return 0.0;
  const int k = leaf.alphabet_size();
  double steps = 0.0;
  Symbol b = last;
  for (int guard = 0; guard <= k; ++guard) {
    int succ = -1, count = 0;
    for (int c = 0; c < k; ++c) {
      if (leaf.allowed(b, static_cast<Symbol>(c))) {
        succ = c;
        ++count;
      }
    }
    if (count != 1) return steps;
    steps += 1.0;
    b = static_cast<Symbol>(succ);
  }
  return kInf;
}

bool word_admissible(const System& leaf, const Word& w) {
  for (Symbol s : w) {
    if (static_cast<int>(s) >= leaf.alphabet_size()) return false;
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!leaf.allowed(w[i - 1], w[i])) return false;
  }
  return true;
}

// Nearest arc of the grid: contained iff gap to its centre + radius < 1/G.
bool arc_contained(double center, double radius, int G) {
  const double g = 1.0 / G;
  const double c = center - std::floor(center);
  const double nearest = std::round(c * G) / G;
  return circle_gap(c, nearest) + radius < g;
}

double arc_weight_map(const System& system, double center, double radius, int G) {
  if (!arc_contained(center, radius, G)) return 0.0;
  if (const auto* r = system.as<CircleRotation>()) {
    if (radius < 0.5 / G) return kInf;
    double c = center;
    for (int j = 1; j < 1000000; ++j) {
      c += r->theta;
      c -= std::floor(c);
      if (!arc_contained(c, radius, G)) return j;
    }
    return kInf;
  }
  const auto* m = system.as<CircleMult>();
  require(m != nullptr, "arc bodies need a circle system");
  double c = center, rad = radius;
  for (int j = 1; j < 4096; ++j) {
    c = c * m->n;
    c -= std::floor(c);
    rad *= m->n;
    if (rad >= 0.5 || !arc_contained(c, rad, G)) return j;
  }
  return kInf;
}

// Known cells of a product body: boundaries B_0..B_m and roofs r_0..r_{m-1}.
struct Cells {
  std::vector<double> B;
  std::vector<double> r;
};

Cells known_cells(const Suspension& s, const Word& w, double extra) {
  const RoofFunction& roof = s.roof;
  Cells cells;
  cells.B.push_back(0.0);
  const int d = roof.depth();
  std::size_t m = w.size() >= static_cast<std::size_t>(std::max(d, 1)) ? w.size() - static_cast<std::size_t>(std::max(d, 1)) + 1 : 0;
  if (roof.is_constant()) m = w.size();
  for (std::size_t j = 0; j < m; ++j) {
    const double rj = roof.is_constant() ? roof.max() : roof.at(std::span<const Symbol>(w).subspan(j, static_cast<std::size_t>(d)));
    cells.r.push_back(rj);
    cells.B.push_back(cells.B.back() + rj);
  }
  // forced continuation symbols (constant roofs only) extend the known cells
  if (roof.is_constant() && extra > 0.0 && !cells.r.empty()) {
    if (std::isinf(extra)) {
      cells.r.push_back(kInf);
      cells.B.push_back(kInf);
    } else {
      for (int j = 0; j < static_cast<int>(extra); ++j) {
        cells.r.push_back(roof.max());
        cells.B.push_back(cells.B.back() + roof.max());
      }
    }
  }
  return cells;
}

// [u, v] (absolute time along the orbit of the first cell) inside a product
// window whose label cell is known.
bool product_contained(const Cells& cells, double u, double v) {
  const std::size_t m = cells.r.size();
  if (m == 0 || u < 0.0) return false;
  if (std::isinf(cells.B.back()) && u >= cells.B[m - 1]) return true;
  if (v > cells.B[m]) return false;
  const auto it = std::upper_bound(cells.B.begin(), cells.B.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - cells.B.begin()) - 1;
  for (std::size_t jj = j == 0 ? 0 : j - 1; jj <= j && jj < m; ++jj) {
    for (int q = 0; q < 4; ++q) {
      const double o = 0.25 * q;
      const double s = cells.B[jj] + o * cells.r[jj];
      double e;
      std::size_t label;
      if (o + 0.75 <= 1.0) {
        e = s + 0.75 * cells.r[jj];
        label = jj;
      } else {
        if (jj + 1 >= m) continue;
        e = cells.B[jj + 1] + (o - 0.25) * cells.r[jj + 1];
        label = jj + 1;
      }
      if (label < m && s <= u && v <= e) return true;
    }
  }
  return false;
}

const Suspension& symbolic_suspension(const Flow& flow) {
  const auto* s = flow.as<Suspension>();
  require(s != nullptr, "product bodies need a suspension flow");
  require(s->base->is_symbolic(), "product bodies need a shift-space base");
  return *s;
}

double product_extra(const Suspension& s, const Word& w) {
  if (w.empty() || !s.roof.is_constant() || s.base->as<DisjointUnion>()) return 0.0;
  return forced_steps(*s.base, w.back());
}

// N for the flow: first sub-step at which the body leaves every window.
std::pair<double, double> product_weight_flow(const Suspension& s, const ProductBody& b) {
  require(b.a <= b.b && b.a >= 0.0, "product body needs 0 <= a <= b");
  const Cells cells = known_cells(s, b.word, product_extra(s, b.word));
  const double h = s.roof.min() / 4.0;
  if (!product_contained(cells, b.a, b.b)) return {0.0, 0.0};
  if (std::isinf(cells.B.back())) return {kInf, 0.0};
  // the body only leaves through the top, so jump close to B_m first
  const double guess = std::max(0.0, cells.B.back() - b.b - 2 * s.roof.max());
  std::uint64_t k = static_cast<std::uint64_t>(std::floor(guess / h));
  while (k > 0 && !product_contained(cells, b.a + k * h, b.b + k * h)) --k;
  while (product_contained(cells, b.a + (k + 1) * h, b.b + (k + 1) * h)) ++k;
  return {(k + 1) * h, h};
}

double product_weight_time_map(const Suspension& s, double t, const ProductBody& b) {
  require(t > 0.0, "time-t map weights need t > 0");
  const Cells cells = known_cells(s, b.word, product_extra(s, b.word));
  if (!product_contained(cells, b.a, b.b)) return 0.0;
  if (std::isinf(cells.B.back())) return kInf;
  std::uint64_t j = static_cast<std::uint64_t>(std::floor(std::max(0.0, cells.B.back() - b.b - 2 * s.roof.max()) / t));
  while (j > 0 && !product_contained(cells, b.a + j * t, b.b + j * t)) --j;
  while (product_contained(cells, b.a + (j + 1) * t, b.b + (j + 1) * t)) ++j;
  return static_cast<double>(j + 1);
}

double rotation_flow_arc(double center, double radius, int G) {
  if (!arc_contained(center, radius, G)) return 0.0;
  if (radius < 0.5 / G) return kInf;
  const double h = 1e-3 / G;
  for (double tau = h; tau <= 1.0 / G + h; tau += h) {
    if (!arc_contained(center + tau, radius, G)) return tau;
  }
  return kInf;
}

int grid_of(const OpenCoverSpec& cover) {
  const auto* g = std::get_if<ArcGrid>(&cover);
  require(g != nullptr && g->G >= 1, "arc bodies need an arc-grid cover");
  return g->G;
}

// Grouped weights: log number of bodies and N per group.
struct Groups {
  std::vector<double> log_count;
  std::vector<double> N;
  double log_total() const {
    double t = -kInf;
    for (double c : log_count) t = log_add(t, c);
    return t;
  }
};

// Critical exponent of log S_alpha = log sum exp(c_g - alpha N_g) by bisection.
DepthTrace bisect(const Groups& g, double n, double alpha_tol) {
  DepthTrace tr;
  tr.n = n;
  tr.log_cover_size = g.log_total();
  bool finite = false;
  double hi = 0.0;
  const double lg = std::log(static_cast<double>(std::max<std::size_t>(1, g.N.size())));
  for (std::size_t i = 0; i < g.N.size(); ++i) {
    if (std::isinf(g.N[i]) || std::isinf(g.log_count[i])) continue;
    finite = true;
    if (g.N[i] <= 0.0) {
      hi = kInf;
      continue;
    }
    hi = std::max(hi, (g.log_count[i] + lg) / g.N[i]);
  }
  if (!finite) return tr;
  require(std::isfinite(hi), "a body outside every cover member has N = 0, so S_alpha never drops below 1");
  hi += 1e-9;
  double lo = 0.0;
  if (kernels::log_caratheodory_parallel(g.log_count, g.N, 0.0) <= 0.0) return tr;
  while (hi - lo > alpha_tol) {
    const double mid = 0.5 * (lo + hi);
    if (kernels::log_caratheodory_parallel(g.log_count, g.N, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    tr.bisection.push_back({lo, hi});
  }
  tr.alpha = 0.5 * (lo + hi);
  return tr;
}

void summarize(EntropyEstimate& est, double alpha_tol, bool richardson) {
  const auto& tr = est.trace;
  if (tr.empty()) return;
  est.value = tr.back().alpha;
  if (richardson && tr.size() >= 2) {
    const auto& a = tr[tr.size() - 2];
    const auto& b = tr.back();
    if (b.n > a.n) est.value = (b.alpha * b.n - a.alpha * a.n) / (b.n - a.n);
  }
  double lo = est.value, hi = est.value;
  for (std::size_t i = tr.size() / 2; i < tr.size(); ++i) {
    lo = std::min(lo, tr[i].alpha);
    hi = std::max(hi, tr[i].alpha);
  }
  est.lower = lo - alpha_tol;
  est.upper = hi + alpha_tol;
}

// Grouped symbolic bodies at depth n: (leaf, last symbol) with N = n + forced.
Groups symbolic_groups(const System& system, const SubsetSpec& Y, std::uint64_t n) {
  Groups g;
  auto add = [&](const System& leaf, double lc, int last) {
    if (std::isinf(lc) && lc < 0) return;
    const double extra = last < 0 ? 0.0 : forced_steps(leaf, static_cast<Symbol>(last));
    g.log_count.push_back(lc);
    g.N.push_back(static_cast<double>(n) + extra);
  };
  if (const auto* cloud = Y.as<SampleCloud>()) {
    std::map<std::pair<ComponentPath, Symbol>, std::set<Word>> prefixes;
    for (const auto& p : cloud->points) {
      require(p.is_symbolic(), "sample cloud points must be symbolic here");
      const ComponentPath path = p.component();
      const System& leaf = system.leaf(path);
      Word w = p.prefix(static_cast<std::size_t>(n));
      if (!word_admissible(leaf, w)) continue;
      if (cloud->filter && !cloud->filter->admits(w, path)) continue;
      const Symbol last = w.back();
      prefixes[{path, last}].insert(std::move(w));
    }
    for (const auto& [key, set] : prefixes) {
      add(system.leaf(key.first), std::log(static_cast<double>(set.size())), key.second);
    }
    return g;
  }
  for (const auto& lc : log_word_counts(system, Y, n)) {
    const System& leaf = system.leaf(lc.path);
    if (lc.by_last.size() == 1 && leaf.as<FullShift>()) {
      add(leaf, lc.by_last[0], -1);
    } else {
      for (std::size_t b = 0; b < lc.by_last.size(); ++b) add(leaf, lc.by_last[b], static_cast<int>(b));
    }
  }
  return g;
}

std::string join(const std::vector<std::uint64_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}
std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void check_increasing(const std::vector<std::uint64_t>& v, const char* what) {
  require(!v.empty(), std::string(what) + " must be nonempty");
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], std::string(what) + " must be increasing");
  require(v[0] >= 1, std::string(what) + " must be >= 1");
}

// Groups of product bodies for a suspension with constant roof at word depth n,
// with N supplied per fiber cell.
template <class Weight>
Groups product_groups(const System& base, const SubsetSpec& Y, std::uint64_t n, int cells, double roof, Weight&& weight) {
  const Groups words = symbolic_groups(base, Y, n);
  Groups g;
  // representative word: all that matters is its length and forced tail
  for (std::size_t i = 0; i < words.N.size(); ++i) {
    const double extra = words.N[i] - static_cast<double>(n);
    for (int q = 0; q < cells; ++q) {
      const double a = roof * q / cells, b = roof * (q + 1) / cells;
      g.log_count.push_back(words.log_count[i]);
      g.N.push_back(weight(n, extra, a, b));
    }
  }
  return g;
}

Cells constant_cells(std::uint64_t n, double extra, double roof) {
  Cells c;
  c.B.push_back(0.0);
  for (std::uint64_t j = 0; j < n; ++j) {
    c.r.push_back(roof);
    c.B.push_back(c.B.back() + roof);
  }
  if (std::isinf(extra)) {
    c.r.push_back(kInf);
    c.B.push_back(kInf);
  } else {
    for (int j = 0; j < static_cast<int>(extra); ++j) {
      c.r.push_back(roof);
      c.B.push_back(c.B.back() + roof);
    }
  }
  return c;
}

double flow_N(const Cells& cells, double a, double b, double h) {
  if (!product_contained(cells, a, b)) return 0.0;
  if (std::isinf(cells.B.back())) return kInf;
  std::uint64_t k = static_cast<std::uint64_t>(std::floor(std::max(0.0, cells.B.back() - b - 2 * cells.r[0]) / h));
  while (k > 0 && !product_contained(cells, a + k * h, b + k * h)) --k;
  while (product_contained(cells, a + (k + 1) * h, b + (k + 1) * h)) ++k;
  return (k + 1) * h;
}

double map_N(const Cells& cells, double a, double b, double t) {
  if (!product_contained(cells, a, b)) return 0.0;
  if (std::isinf(cells.B.back())) return kInf;
  std::uint64_t j = static_cast<std::uint64_t>(std::floor(std::max(0.0, cells.B.back() - b - 2 * cells.r[0]) / t));
  while (j > 0 && !product_contained(cells, a + j * t, b + j * t)) --j;
  while (product_contained(cells, a + (j + 1) * t, b + (j + 1) * t)) ++j;
  return static_cast<double>(j + 1);
}

const Suspension& constant_roof_suspension(const Flow& flow) {
  const Suspension& s = symbolic_suspension(flow);
  if (!s.roof.is_constant()) throw Unsupported("flow Caratheodory sums need a constant roof");
  return s;
}

// Rotation flow or rotation time map: arcs of radius below half a grid cell
// never leave a member, so every weight vanishes.
DepthTrace rotation_trace(std::uint64_t M, int G, bool flow, double t) {
  Groups g;
  const double radius = 0.5 / static_cast<double>(M);
  std::map<double, double> byN;
  for (std::uint64_t i = 0; i < M; ++i) {
    const double c = (i + 0.5) / static_cast<double>(M);
    const double N = flow ? rotation_flow_arc(c, radius, G) : arc_weight_map(System::circle_rotation(t), c, radius, G);
    auto [it, fresh] = byN.try_emplace(N, 0.0);
    it->second += 1.0;
  }
  for (const auto& [N, count] : byN) {
    g.N.push_back(N);
    g.log_count.push_back(std::log(count));
  }
  return bisect(g, static_cast<double>(M), 1e-3);
}

}  // namespace

double caratheodory_sum(const std::vector<CoverElement>& cover, double alpha) {
  double s = 0.0;
  for (const auto& e : cover) {
    require(e.D >= 0.0 && e.D <= 1.0, "cover weights must lie in [0, 1]");
    if (e.D == 0.0) {
      require(alpha > 0.0, "0^alpha is undefined for alpha <= 0");
      continue;
    }
    s += std::pow(e.D, alpha);
  }
  return s;
}

CoverElement cover_weight(const System& system, const OpenCoverSpec& cover, const CoverBody& body) {
  return std::visit(
      overloaded{[&](const CylinderBody& c) {
                   require(std::holds_alternative<OneCylinders>(cover), "cylinder bodies need the 1-cylinder cover");
                   require(system.is_symbolic(), "cylinder bodies need a symbolic system");
                   const System& leaf = system.leaf(c.path);
                   if (c.word.empty()) return finish(c, leaf.alphabet_size() == 1 ? kInf : 0.0);
                   if (!word_admissible(leaf, c.word)) return finish(c, kInf);
                   return finish(c, static_cast<double>(c.word.size()) + forced_steps(leaf, c.word.back()));
                 },
                 [&](const ArcBody& a) {
                   require(system.is_circle(), "arc bodies need a circle system");
                   require(a.radius >= 0.0, "arc radius must be >= 0");
                   return finish(a, arc_weight_map(system, a.center, a.radius, grid_of(cover)));
                 },
                 [&](const ProductBody&) -> CoverElement {
                   throw ValidationError("product bodies live in a suspension flow");
                 }},
      body);
}

CoverElement cover_weight(const Flow& flow, const OpenCoverSpec& cover, const CoverBody& body) {
  return std::visit(
      overloaded{[&](const ProductBody& b) {
                   require(std::holds_alternative<ProductWindows>(cover), "product bodies need the product-window cover");
                   const auto [N, unc] = product_weight_flow(symbolic_suspension(flow), b);
                   return finish(b, N, unc);
                 },
                 [&](const ArcBody& a) {
                   require(flow.as<RotationFlow>() != nullptr, "arc bodies need the rotation flow");
                   return finish(a, rotation_flow_arc(a.center, a.radius, grid_of(cover)), 1e-3 / grid_of(cover));
                 },
                 [&](const CylinderBody&) -> CoverElement {
                   throw ValidationError("cylinder bodies live in a shift space, not a flow");
                 }},
      body);
}

CoverElement cover_weight(const TimeMap& map, const OpenCoverSpec& cover, const CoverBody& body) {
  return std::visit(
      overloaded{[&](const ProductBody& b) {
                   require(std::holds_alternative<ProductWindows>(cover), "product bodies need the product-window cover");
                   return finish(b, product_weight_time_map(symbolic_suspension(*map.flow), map.t, b));
                 },
                 [&](const ArcBody& a) {
                   require(map.flow->as<RotationFlow>() != nullptr, "arc bodies need the rotation flow");
                   return finish(a, arc_weight_map(System::circle_rotation(map.t), a.center, a.radius, grid_of(cover)));
                 },
                 [&](const CylinderBody&) -> CoverElement {
                   throw ValidationError("cylinder bodies live in a shift space, not a flow");
                 }},
      body);
}

EntropyEstimate bowen_entropy_symbolic(const System& system, const SubsetSpec& Y, const std::vector<std::uint64_t>& depths,
                                       double alpha_tol) {
  require(system.is_symbolic(), "symbolic Bowen entropy needs a shift space");
  require(alpha_tol > 0.0, "alpha_tol must be > 0");
  check_increasing(depths, "depths");
  EntropyEstimate est;
  est.method = "caratheodory-symbolic";
  est.params = "depths=" + join(depths) + ";alpha_tol=" + std::to_string(alpha_tol);
  est.upper_bound_only = !Y.is_predicate();
  for (std::uint64_t n : depths) {
    const Groups g = symbolic_groups(system, Y, n);
    DepthTrace tr = bisect(g, static_cast<double>(n), alpha_tol);
    if (std::isinf(tr.log_cover_size)) est.empty_cover = true;
    tr.alpha_closed = std::isinf(tr.log_cover_size) ? 0.0 : tr.log_cover_size / static_cast<double>(n);
    est.trace.push_back(std::move(tr));
  }
  if (est.empty_cover) {
    est.value = est.lower = est.upper = 0.0;
    est.note = "predicate admits no words at some depth";
    return est;
  }
  summarize(est, alpha_tol, false);
  return est;
}

EntropyEstimate bowen_entropy_metric(const System& system, const std::vector<int>& arcs, int grid, double alpha_tol) {
  require(system.is_circle(), "metric Bowen entropy needs a circle system");
  require(!arcs.empty() && grid >= 1, "need arc counts and a grid");
  EntropyEstimate est;
  est.method = "caratheodory-metric";
  std::ostringstream ps;
  ps << "grid=" << grid << ";arcs=";
  for (std::size_t i = 0; i < arcs.size(); ++i) ps << (i ? "," : "") << arcs[i];
  est.params = ps.str();
  std::vector<double> meanN;
  for (int M : arcs) {
    require(M >= 1 && (est.trace.empty() || M > static_cast<int>(est.trace.back().n)), "arc counts must be increasing");
    std::map<double, double> byN;
    for (int i = 0; i < M; ++i) {
      const double N = arc_weight_map(system, (i + 0.5) / M, 0.5 / M, grid);
      byN[N] += 1.0;
    }
    Groups g;
    double nsum = 0.0, ncount = 0.0;
    for (const auto& [N, count] : byN) {
      g.N.push_back(N);
      g.log_count.push_back(std::log(count));
      if (std::isfinite(N)) {
        nsum += N * count;
        ncount += count;
      }
    }
    DepthTrace tr = bisect(g, static_cast<double>(M), alpha_tol);
    tr.alpha_closed = ncount > 0 ? std::log(static_cast<double>(M)) / (nsum / ncount) : 0.0;
    est.trace.push_back(std::move(tr));
    meanN.push_back(ncount > 0 ? nsum / ncount : kInf);
  }
  // alpha(M) ~ log M / (log_k M - c): extrapolate in the mean N
  est.value = est.trace.back().alpha;
  if (est.trace.size() >= 2 && std::isfinite(meanN.back()) && std::isfinite(meanN[meanN.size() - 2]) &&
      meanN.back() > meanN[meanN.size() - 2]) {
    const auto& a = est.trace[est.trace.size() - 2];
    const auto& b = est.trace.back();
    est.value = (std::log(b.n) - std::log(a.n)) / (meanN.back() - meanN[meanN.size() - 2]);
    est.note = "value is the slope of log M against the mean N";
  }
  est.lower = std::min(est.value, est.trace.back().alpha) - alpha_tol;
  est.upper = std::max(est.value, est.trace.back().alpha) + alpha_tol;
  return est;
}

EntropyEstimate bowen_entropy_time_map(const TimeMap& map, const SubsetSpec& Y, const FlowEntropyParams& params) {
  require(map.t > 0.0, "time maps need t > 0 here");
  check_increasing(params.depths, "depths");
  EntropyEstimate est;
  est.method = "caratheodory-symbolic";
  est.params = "t=" + std::to_string(map.t) + ";depths=" + join(params.depths);
  if (map.flow->as<RotationFlow>()) {
    est.method = "caratheodory-metric";
    for (std::uint64_t M : {64u, 256u}) est.trace.push_back(rotation_trace(M, 16, false, map.t));
    summarize(est, params.alpha_tol, false);
    return est;
  }
  const Suspension& s = constant_roof_suspension(*map.flow);
  require(params.fiber_cells >= 2, "fiber_cells must be >= 2");
  const double c = s.roof.max();
  est.upper_bound_only = !Y.is_predicate();
  for (std::uint64_t n : params.depths) {
    const Groups g = product_groups(*s.base, Y, n, params.fiber_cells, c, [&](std::uint64_t nn, double extra, double a, double b) {
      return map_N(constant_cells(nn, extra, c), a, b, map.t);
    });
    DepthTrace tr = bisect(g, static_cast<double>(n), params.alpha_tol);
    if (std::isinf(tr.log_cover_size)) est.empty_cover = true;
    tr.alpha_closed = std::isinf(tr.log_cover_size) ? 0.0 : tr.log_cover_size / (static_cast<double>(n) * c / map.t);
    est.trace.push_back(std::move(tr));
  }
  if (est.empty_cover) {
    est.value = est.lower = est.upper = 0.0;
    return est;
  }
  summarize(est, params.alpha_tol, false);
  return est;
}

EntropyEstimate bowen_entropy_flow(const Flow& flow, const SubsetSpec& Y, const FlowEntropyParams& params) {
  check_increasing(params.depths, "depths");
  EntropyEstimate est;
  est.method = "caratheodory-metric";
  est.params = "depths=" + join(params.depths) + ";times=" + join(params.times);
  if (flow.as<RotationFlow>()) {
    for (std::uint64_t M : {64u, 256u}) est.trace.push_back(rotation_trace(M, 16, true, 0.0));
    summarize(est, params.alpha_tol, false);
  } else if (flow.as<Suspension>()) {
    const Suspension& s = constant_roof_suspension(flow);
    require(params.fiber_cells >= 2, "fiber_cells must be >= 2");
    const double c = s.roof.max();
    const double h = s.roof.min() / 4.0;
    est.upper_bound_only = !Y.is_predicate();
    for (std::uint64_t n : params.depths) {
      const Groups g = product_groups(*s.base, Y, n, params.fiber_cells, c, [&](std::uint64_t nn, double extra, double a, double b) {
        return flow_N(constant_cells(nn, extra, c), a, b, h);
      });
      DepthTrace tr = bisect(g, static_cast<double>(n), params.alpha_tol);
      if (std::isinf(tr.log_cover_size)) est.empty_cover = true;
      tr.alpha_closed = std::isinf(tr.log_cover_size) ? 0.0 : tr.log_cover_size / (static_cast<double>(n) * c);
      est.trace.push_back(std::move(tr));
    }
    if (est.empty_cover) {
      est.value = est.lower = est.upper = 0.0;
    } else {
      summarize(est, params.alpha_tol, false);
    }
    est.note = "N sampled in sub-steps of " + std::to_string(h);
  } else {
    throw Unsupported("Bowen entropy of flows needs a suspension or the rotation flow");
  }
  for (double t : params.times) {
    require(t > 0.0, "reduction times must be > 0");
    const EntropyEstimate e = bowen_entropy_time_map(time_map(flow, t), Y, params);
    est.reductions.push_back({t, e.value, e.value / t});
  }
  return est;
}

namespace {

struct SlopeSummary {
  double value = 0.0, lower = 0.0, upper = 0.0;
};

SlopeSummary slopes(const std::vector<double>& x, const std::vector<double>& logr) {
  SlopeSummary s;
  if (x.size() < 2) {
    s.value = s.lower = s.upper = x.empty() ? 0.0 : logr.back() / x.back();
    return s;
  }
  std::vector<double> sl;
  for (std::size_t i = 1; i < x.size(); ++i) sl.push_back((logr[i] - logr[i - 1]) / (x[i] - x[i - 1]));
  s.value = sl.back();
  s.lower = s.upper = s.value;
  for (std::size_t i = sl.size() / 2; i < sl.size(); ++i) {
    s.lower = std::min(s.lower, sl[i]);
    s.upper = std::max(s.upper, sl[i]);
  }
  return s;
}

// Greedy spanning and separated counts over sorted samples; the Bowen
// distance dominates the circle distance, so only neighbours within eps
// are examined.
std::pair<std::size_t, std::size_t> sampled_counts(const std::vector<std::vector<double>>& orbit, double eps) {
  const std::size_t N = orbit.size();
  auto dn = [&](std::size_t i, std::size_t j) {
    double d = 0.0;
    for (std::size_t s = 0; s < orbit[i].size(); ++s) d = std::max(d, circle_gap(orbit[i][s], orbit[j][s]));
    return d;
  };
  std::vector<char> covered(N, 0);
  std::size_t span = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (covered[i]) continue;
    ++span;
    covered[i] = 1;
    for (std::size_t step = 1; step < N; ++step) {
      const std::size_t j = (i + step) % N;
      if (circle_gap(orbit[i][0], orbit[j][0]) >= eps || dn(i, j) >= eps) break;
      covered[j] = 1;
    }
  }
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < N; ++i) {
    bool ok = true;
    for (std::size_t back = picked.size(); back-- > 0;) {
      const std::size_t j = picked[back];
      if (orbit[i][0] - orbit[j][0] >= eps) break;
      if (dn(i, j) < eps) {
        ok = false;
        break;
      }
    }
    if (ok && !picked.empty() && i != picked.front() && circle_gap(orbit[i][0], orbit[picked.front()][0]) < eps &&
        dn(i, picked.front()) < eps)
      ok = false;
    if (ok) picked.push_back(i);
  }
  return {span, picked.size()};
}

std::vector<double> sample_coords(const SubsetSpec& K, std::size_t budget) {
  std::vector<double> xs;
  if (const auto* cloud = K.as<SampleCloud>()) {
    for (const auto& p : cloud->points) xs.push_back(p.circle_coordinate());
  } else {
    require(K.as<WholeSpace>() != nullptr, "circle spanning sets accept the whole space or a sample cloud");
    for (std::size_t i = 0; i < budget; ++i) xs.push_back((i + 0.5) / static_cast<double>(budget));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

void check_eps(const std::vector<double>& eps) {
  require(!eps.empty(), "eps_list must be nonempty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    require(eps[i] > 0.0 && eps[i] < 1.0, "eps must lie in (0, 1)");
    if (i) require(eps[i] < eps[i - 1], "eps_list must be decreasing");
  }
}

}  // namespace

EntropyEstimate spanning_entropy(const System& system, const SubsetSpec& K, const std::vector<std::uint64_t>& n_list,
                                 const std::vector<double>& eps_list, std::size_t sampler_budget) {
  check_increasing(n_list, "n_list");
  check_eps(eps_list);
  EntropyEstimate est;
  est.method = "spanning";
  est.params = "n=" + join(n_list) + ";eps=" + join(eps_list);
  const double eps = eps_list.back();
  std::vector<double> xs, logr, logs;
  if (system.is_symbolic()) {
    const auto m = static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / eps)));
    for (std::uint64_t n : n_list) {
      double lr;
      if (K.is_predicate()) {
        lr = log_word_count(system, K, n + m);
      } else {
        const Groups g = symbolic_groups(system, K, n + m);
        lr = g.log_total();
        est.upper_bound_only = true;
      }
      xs.push_back(static_cast<double>(n));
      logr.push_back(lr);
      DepthTrace tr;
      tr.n = static_cast<double>(n);
      tr.log_cover_size = lr;
      tr.alpha_closed = lr / static_cast<double>(n);
      est.trace.push_back(tr);
    }
    if (std::any_of(logr.begin(), logr.end(), [](double v) { return std::isinf(v); })) {
      est.empty_cover = true;
      return est;
    }
    const SlopeSummary s = slopes(xs, logr);
    est.value = s.value;
    est.lower = s.lower;
    est.upper = s.upper;
    return est;
  }
  require(system.is_circle(), "spanning entropy needs a symbolic or circle system");
  const std::vector<double> pts = sample_coords(K, sampler_budget);
  const std::uint64_t nmax = n_list.back();
  std::vector<std::vector<double>> full(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double x = pts[i];
    for (std::uint64_t j = 0; j < nmax; ++j) {
      full[i].push_back(x);
      if (const auto* r = system.as<CircleRotation>())
        x += r->theta;
      else
        x *= system.as<CircleMult>()->n;
      x -= std::floor(x);
    }
  }
  for (std::uint64_t n : n_list) {
    std::vector<std::vector<double>> orbit(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) orbit[i].assign(full[i].begin(), full[i].begin() + static_cast<std::ptrdiff_t>(n));
    const auto [span, sep] = sampled_counts(orbit, eps);
    if (span * 4 > pts.size()) est.inconclusive = true;
    xs.push_back(static_cast<double>(n));
    logr.push_back(std::log(static_cast<double>(span)));
    logs.push_back(std::log(static_cast<double>(sep)));
    DepthTrace tr;
    tr.n = static_cast<double>(n);
    tr.log_cover_size = logr.back();
    tr.alpha_closed = logr.back() / static_cast<double>(n);
    est.trace.push_back(tr);
  }
  const SlopeSummary a = slopes(xs, logr), b = slopes(xs, logs);
  est.value = a.value;
  est.lower = std::min(a.lower, b.lower);
  est.upper = std::max(a.upper, b.upper);
  est.note = "greedy spanning / separated sets over " + std::to_string(pts.size()) + " samples";
  if (est.inconclusive) {
    est.upper += std::log(2.0);
    est.note += "; sampler budget too small for the spanning sets";
  }
  return est;
}

EntropyEstimate spanning_entropy(const Flow& flow, const SubsetSpec& K, const std::vector<double>& T_list,
                                 const std::vector<double>& eps_list, std::size_t sampler_budget) {
  require(!T_list.empty(), "T_list must be nonempty");
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    require(T_list[i] > 0.0, "times must be > 0");
    if (i) require(T_list[i] > T_list[i - 1], "T_list must be increasing");
  }
  check_eps(eps_list);
  EntropyEstimate est;
  est.method = "spanning";
  est.params = "T=" + join(T_list) + ";eps=" + join(eps_list);
  const double eps = eps_list.back();
  std::vector<double> logr;
  if (flow.as<Suspension>()) {
    const Suspension& s = constant_roof_suspension(flow);
    require(K.is_predicate(), "suspension spanning sets need a word predicate");
    const double c = s.roof.max();
    const auto m = static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / eps)));
    // base words covering every visited cell, times a fiber grid of mesh eps * roof
    const double fiber = std::log(std::ceil(1.0 / (2.0 * eps)));
    for (double T : T_list) {
      const auto n = static_cast<std::uint64_t>(std::ceil(T / c)) + 1 + m;
      logr.push_back(log_word_count(*s.base, K, n) + fiber);
      DepthTrace tr;
      tr.n = T;
      tr.log_cover_size = logr.back();
      tr.alpha_closed = logr.back() / T;
      est.trace.push_back(tr);
    }
    if (std::isinf(logr.back())) {
      est.empty_cover = true;
      return est;
    }
    const SlopeSummary sl = slopes(T_list, logr);
    est.value = sl.value;
    est.lower = sl.lower;
    est.upper = sl.upper;
    return est;
  }
  if (!flow.as<RotationFlow>()) throw Unsupported("spanning entropy of flows needs a constant-roof suspension or the rotation flow");
  const std::vector<double> pts = sample_coords(K, sampler_budget);
  std::vector<double> logs;
  for (double T : T_list) {
    const double dt = std::min(0.05, T / 200.0);
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt));
    std::vector<std::vector<double>> orbit(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j <= steps; ++j) {
        const double x = pts[i] + static_cast<double>(j) * dt;
        orbit[i].push_back(x - std::floor(x));
      }
    }
    const auto [span, sep] = sampled_counts(orbit, eps);
    if (span * 4 > pts.size()) est.inconclusive = true;
    logr.push_back(std::log(static_cast<double>(span)));
    logs.push_back(std::log(static_cast<double>(sep)));
    DepthTrace tr;
    tr.n = T;
    tr.log_cover_size = logr.back();
    est.trace.push_back(tr);
  }
  const SlopeSummary a = slopes(T_list, logr), b = slopes(T_list, logs);
  est.value = a.value;
  est.lower = std::min(a.lower, b.lower);
  est.upper = std::max(a.upper, b.upper);
  est.note = "sampled at step min(0.05, T/200)";
  return est;
}

}  // namespace ergode
