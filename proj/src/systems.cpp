#include "ergode/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergode/errors.hpp"

namespace ergode {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double frac(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

ComponentPath pop_front(const ComponentPath& p) { return ComponentPath(p.begin() + 1, p.end()); }

}  // namespace

// ---------------------------------------------------------------- System

System System::full_shift(int k) {
  require(k >= 2 && k <= 256, "full shift alphabet must be in [2, 256]");
  return System(FullShift{k});
}

System System::markov_shift(std::vector<std::vector<int>> adjacency) {
  const std::size_t k = adjacency.size();
  require(k >= 1 && k <= 256, "markov shift adjacency must be k x k with 1 <= k <= 256");
  MarkovShift m;
  m.k = static_cast<int>(k);
  m.adjacency.assign(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    require(adjacency[i].size() == k, "markov shift adjacency must be square");
    for (std::size_t j = 0; j < k; ++j) {
      const int v = adjacency[i][j];
      require(v == 0 || v == 1, "markov shift adjacency entries must be 0 or 1");
      m.adjacency[i * k + j] = static_cast<std::uint8_t>(v);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    bool row = false;
    bool col = false;
    for (std::size_t j = 0; j < k; ++j) {
      row = row || m.adjacency[i * k + j] != 0;
      col = col || m.adjacency[j * k + i] != 0;
    }
    require(row && col, "markov shift has a dead state (empty row or column)");
  }
  return System(std::move(m));
}

System System::golden_mean() { return markov_shift({{1, 1}, {1, 0}}); }

System System::circle_mult(int n) {
  require(n >= 2, "circle multiplication needs n >= 2");
  return System(CircleMult{n});
}

System System::circle_rotation(double theta) {
  require(std::isfinite(theta), "rotation angle must be finite");
  return System(CircleRotation{frac(theta)});
}

System System::disjoint_union(System left, System right) {
  require(left.is_symbolic() == right.is_symbolic(),
          "disjoint union components must both be symbolic or both be circle systems");
  return System(DisjointUnion{std::make_shared<const System>(std::move(left)),
                              std::make_shared<const System>(std::move(right))});
}

bool System::is_symbolic() const {
  return std::visit(overloaded{[](const FullShift&) { return true; },
                               [](const MarkovShift&) { return true; },
                               [](const DisjointUnion& u) { return u.left->is_symbolic() && u.right->is_symbolic(); },
                               [](const auto&) { return false; }},
                    kind_);
}

bool System::is_circle() const {
  return std::holds_alternative<CircleMult>(kind_) || std::holds_alternative<CircleRotation>(kind_);
}

int System::alphabet_size() const {
  return std::visit(overloaded{[](const FullShift& f) { return f.k; },
                               [](const MarkovShift& m) { return m.k; },
                               [](const CircleMult& c) { return c.n; },
                               [](const DisjointUnion& u) {
                                 return std::max(u.left->alphabet_size(), u.right->alphabet_size());
                               },
                               [](const CircleRotation&) { return 0; }},
                    kind_);
}

const System& System::leaf(const ComponentPath& path) const {
  const System* s = this;
  for (auto c : path) {
    const auto* u = s->as<DisjointUnion>();
    require(u != nullptr, "component path descends into a non-union system");
    require(c <= 1, "component index must be 0 or 1");
    s = c == 0 ? u->left.get() : u->right.get();
  }
  require(s->as<DisjointUnion>() == nullptr, "component path stops at a union, not a leaf");
  return *s;
}

std::vector<ComponentPath> System::leaf_paths() const {
  const auto* u = as<DisjointUnion>();
  if (!u) return {ComponentPath{}};
  std::vector<ComponentPath> out;
  for (std::uint8_t c = 0; c < 2; ++c) {
    const System& child = c == 0 ? *u->left : *u->right;
    for (auto p : child.leaf_paths()) {
      p.insert(p.begin(), c);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::uint8_t> System::adjacency() const {
  if (const auto* f = as<FullShift>()) return std::vector<std::uint8_t>(static_cast<std::size_t>(f->k * f->k), 1);
  if (const auto* m = as<MarkovShift>()) return m->adjacency;
  throw ValidationError("adjacency requested from a non-shift system: " + describe());
}

bool System::allowed(Symbol a, Symbol b) const {
  if (const auto* f = as<FullShift>()) return a < f->k && b < f->k;
  if (const auto* m = as<MarkovShift>()) return a < m->k && b < m->k && m->allowed(a, b);
  throw ValidationError("transition query on a non-shift system: " + describe());
}

bool System::is_invertible() const { return std::holds_alternative<CircleRotation>(kind_); }

std::string System::describe() const {
  return std::visit(overloaded{[](const FullShift& f) { return "full_shift(" + std::to_string(f.k) + ")"; },
                               [](const MarkovShift& m) {
                                 std::string s = "markov_shift(";
                                 for (int i = 0; i < m.k; ++i) {
                                   if (i) s += '/';
                                   for (int j = 0; j < m.k; ++j) s += m.allowed(i, j) ? '1' : '0';
                                 }
                                 return s + ")";
                               },
                               [](const CircleMult& c) { return "circle_mult(" + std::to_string(c.n) + ")"; },
                               [](const CircleRotation& r) { return "circle_rotation(" + fmt_double(r.theta) + ")"; },
                               [](const DisjointUnion& u) {
                                 return "union(" + u.left->describe() + "," + u.right->describe() + ")";
                               }},
                    kind_);
}

// ---------------------------------------------------------------- RoofFunction

RoofFunction RoofFunction::constant(double value) {
  require(std::isfinite(value) && value > 0.0, "roof value must be positive and finite");
  RoofFunction r;
  r.values_ = {value};
  r.min_ = r.max_ = value;
  return r;
}

RoofFunction RoofFunction::cylinder(int depth, int alphabet, std::vector<double> values) {
  if (depth == 0) {
    require(values.size() == 1, "depth-0 roof takes exactly one value");
    return constant(values[0]);
  }
  require(depth > 0 && depth <= 8, "roof depth must be in [0, 8]");
  require(alphabet >= 2, "roof alphabet must be >= 2");
  std::size_t expected = 1;
  for (int i = 0; i < depth; ++i) expected *= static_cast<std::size_t>(alphabet);
  require(values.size() == expected, "roof needs one value per depth-d cylinder");
  RoofFunction r;
  r.depth_ = depth;
  r.alphabet_ = alphabet;
  r.min_ = *std::min_element(values.begin(), values.end());
  r.max_ = *std::max_element(values.begin(), values.end());
  require(r.min_ > 0.0 && std::isfinite(r.max_), "roof values must be positive and finite");
  r.values_ = std::move(values);
  return r;
}

double RoofFunction::at(std::span<const Symbol> window) const {
  if (depth_ == 0) return values_[0];
  std::size_t code = 0;
  for (int i = 0; i < depth_; ++i) code = code * static_cast<std::size_t>(alphabet_) + window[static_cast<std::size_t>(i)];
  return values_[code];
}

double RoofFunction::at(const PointGenerator& base_point) const {
  if (depth_ == 0) return values_[0];
  Word w = base_point.prefix(static_cast<std::size_t>(depth_));
  return at(w);
}

// ---------------------------------------------------------------- Flow

Flow Flow::rotation() { return Flow(RotationFlow{}); }

Flow Flow::suspension(System base, RoofFunction roof) {
  if (roof.depth() > 0) {
    require(base.is_symbolic(), "cylinder roofs need a symbolic base");
    require(roof.alphabet() >= base.alphabet_size(), "roof alphabet smaller than the base alphabet");
  }
  return Flow(Suspension{std::make_shared<const System>(std::move(base)), std::move(roof)});
}

Flow Flow::torus_translation(std::vector<double> velocity) {
  require(!velocity.empty(), "torus translation needs a velocity vector");
  for (double v : velocity) require(std::isfinite(v), "velocity must be finite");
  return Flow(TorusTranslation{std::move(velocity)});
}

bool Flow::is_invertible() const {
  if (const auto* s = as<Suspension>()) return s->base->is_invertible();
  return true;
}

std::string Flow::describe() const {
  return std::visit(overloaded{[](const RotationFlow&) { return std::string("rotation_flow"); },
                               [](const Suspension& s) {
                                 std::string r = "suspension(" + s.base->describe() + ",roof=";
                                 if (s.roof.depth() == 0) {
                                   r += fmt_double(s.roof.values()[0]);
                                 } else {
                                   r += "depth" + std::to_string(s.roof.depth()) + "[" + fmt_double(s.roof.min()) +
                                        "," + fmt_double(s.roof.max()) + "]";
                                 }
                                 return r + ")";
                               },
                               [](const TorusTranslation& t) {
                                 std::string r = "torus_translation(";
                                 for (std::size_t i = 0; i < t.velocity.size(); ++i) {
                                   if (i) r += ',';
                                   r += fmt_double(t.velocity[i]);
                                 }
                                 return r + ")";
                               }},
                    kind_);
}

TimeMap time_map(const Flow& flow, double t) {
  require(std::isfinite(t) && t != 0.0, "time-t map needs a finite nonzero t");
  if (t < 0.0) require(flow.is_invertible(), "negative time on a non-invertible flow");
  return TimeMap{std::make_shared<const Flow>(flow), t};
}

std::string describe(const MapDynamics& dyn) {
  return std::visit(overloaded{[](const System& s) { return s.describe(); },
                               [](const TimeMap& m) { return "time_map(" + m.flow->describe() + ",t=" + fmt_double(m.t) + ")"; }},
                    dyn);
}

// ---------------------------------------------------------------- points

void check_point(const System& system, const PointGenerator& x) {
  const System& leaf = system.leaf(x.component());
  if (leaf.is_symbolic()) {
    require(x.is_symbolic(), "symbolic system " + leaf.describe() + " needs a symbolic point");
    Word w = x.prefix(64);
    const int k = leaf.alphabet_size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      require(w[i] < k, "point symbol outside the alphabet of " + leaf.describe());
      if (i > 0) require(leaf.allowed(w[i - 1], w[i]), "point word is not admissible in " + leaf.describe());
    }
    return;
  }
  if (const auto* cm = leaf.as<CircleMult>(); cm && x.is_symbolic()) {
    require(x.digit_base() == static_cast<std::uint32_t>(cm->n), "digit point base does not match circle_mult");
    return;
  }
  require(!x.is_symbolic() && x.coords().size() == 1, "circle system needs a one-coordinate point");
}

void check_point(const Flow& flow, const PointGenerator& x) {
  std::visit(overloaded{[&](const RotationFlow&) {
                          require(!x.is_symbolic() && x.coords().size() == 1, "rotation flow needs a circle point");
                        },
                        [&](const TorusTranslation& t) {
                          require(!x.is_symbolic() && x.coords().size() == t.velocity.size(),
                                  "torus point dimension does not match the velocity");
                        },
                        [&](const Suspension& s) {
                          check_point(*s.base, x);
                          const double fib = x.fiber().value_or(0.0);
                          require(fib >= 0.0 && fib < s.roof.at(x), "fiber height must lie in [0, roof(x))");
                        }},
             flow.kind());
}

PointGenerator step(const System& system, const PointGenerator& x) {
  const System& leaf = system.leaf(x.component());
  return std::visit(
      overloaded{[&](const FullShift&) { return x.shifted(1); },
                 [&](const MarkovShift&) { return x.shifted(1); },
                 [&](const CircleMult& c) {
                   if (x.is_symbolic()) return x.shifted(1);
                   require(x.coords().size() == 1, "circle_mult needs a circle point");
                   return x.with_coords({frac(static_cast<double>(c.n) * x.coords()[0])});
                 },
                 [&](const CircleRotation& r) {
                   require(!x.is_symbolic() && x.coords().size() == 1, "circle_rotation needs a circle point");
                   return x.with_coords({frac(x.coords()[0] + r.theta)});
                 },
                 [&](const DisjointUnion&) -> PointGenerator {
                   throw ValidationError("point carries no component path for " + system.describe());
                 }},
      leaf.kind());
}

PointGenerator step(const MapDynamics& dyn, const PointGenerator& x) {
  return std::visit(overloaded{[&](const System& s) { return step(s, x); },
                               [&](const TimeMap& m) { return time_t_map(*m.flow, m.t, x); }},
                    dyn);
}

PointGenerator iterate(const MapDynamics& dyn, const PointGenerator& x, std::uint64_t n) {
  if (const auto* s = std::get_if<System>(&dyn)) {
    const System& leaf = s->leaf(x.component());
    if (leaf.is_symbolic() || (leaf.as<CircleMult>() && x.is_symbolic())) return x.shifted(n);
    if (const auto* r = leaf.as<CircleRotation>()) {
      const double v = std::fmod(static_cast<double>(n) * r->theta, 1.0);
      return x.with_coords({frac(x.coords()[0] + v)});
    }
  }
  if (const auto* m = std::get_if<TimeMap>(&dyn)) return time_t_map(*m->flow, m->t * static_cast<double>(n), x);
  PointGenerator p = x;
  for (std::uint64_t i = 0; i < n; ++i) p = step(dyn, p);
  return p;
}

PointGenerator time_t_map(const Flow& flow, double t, const PointGenerator& x) {
  require(std::isfinite(t), "flow time must be finite");
  return std::visit(
      overloaded{[&](const RotationFlow&) {
                   require(!x.is_symbolic() && x.coords().size() == 1, "rotation flow needs a circle point");
                   return x.with_coords({frac(x.coords()[0] + std::fmod(t, 1.0))});
                 },
                 [&](const TorusTranslation& tt) {
                   require(!x.is_symbolic() && x.coords().size() == tt.velocity.size(),
                           "torus point dimension does not match the velocity");
                   std::vector<double> c = x.coords();
                   for (std::size_t i = 0; i < c.size(); ++i) c[i] = frac(c[i] + std::fmod(t * tt.velocity[i], 1.0));
                   return x.with_coords(std::move(c));
                 },
                 [&](const Suspension& s) {
                   if (t < 0.0) require(s.base->is_invertible(), "negative time on a suspension over a non-invertible base");
                   double fib = x.fiber().value_or(0.0) + t;
                   PointGenerator base = x.with_fiber(std::nullopt);
                   if (s.roof.depth() == 0) {
                     const double c = s.roof.values()[0];
                     const double m = std::floor(fib / c);
                     fib -= m * c;
                     double steps = m;
                     if (fib >= c) {
                       fib -= c;
                       steps += 1.0;
                     }
                     if (fib < 0.0) {
                       fib += c;
                       steps -= 1.0;
                     }
                     if (steps > 0.0) {
                       base = iterate(*s.base, base, static_cast<std::uint64_t>(steps));
                     } else if (steps < 0.0) {
                       // invertible base only: a circle rotation
                       const auto* r = s.base->leaf(base.component()).as<CircleRotation>();
                       require(r != nullptr, "backward flow needs an invertible base");
                       const double v = std::fmod(-steps * r->theta, 1.0);
                       base = base.with_coords({frac(base.coords()[0] - v)});
                     }
                     return base.with_fiber(fib);
                   }
                   // cylinder roof: walk roof cells, fetching symbols in chunks
                   std::uint64_t pos = 0;
                   Word buf;
                   std::uint64_t buf_start = 0;
                   const auto d = static_cast<std::size_t>(s.roof.depth());
                   auto roof_at = [&](std::uint64_t i) {
                     if (buf.empty() || i < buf_start || i + d > buf_start + buf.size()) {
                       buf.assign(4096 + d, 0);
                       buf_start = i;
                       base.symbols(i, buf);
                     }
                     return s.roof.at(std::span<const Symbol>(buf).subspan(static_cast<std::size_t>(i - buf_start), d));
                   };
                   double r = roof_at(pos);
                   while (fib >= r) {
                     fib -= r;
                     ++pos;
                     r = roof_at(pos);
                   }
                   return base.shifted(pos).with_fiber(fib);
                 }},
      flow.kind());
}

// ---------------------------------------------------------------- metric

MetricSpec MetricSpec::of(const System& system) {
  if (const auto* u = system.as<DisjointUnion>()) {
    return MetricSpec(Union{std::make_shared<const MetricSpec>(of(*u->left)),
                            std::make_shared<const MetricSpec>(of(*u->right))});
  }
  if (system.is_symbolic()) return MetricSpec(Symbolic{});
  return MetricSpec(Circle{});
}

MetricSpec MetricSpec::of(const Flow& flow) {
  return std::visit(overloaded{[](const RotationFlow&) { return MetricSpec(Circle{}); },
                               [](const TorusTranslation& t) {
                                 return MetricSpec(Torus{static_cast<int>(t.velocity.size())});
                               },
                               [](const Suspension& s) {
                                 return MetricSpec(OfSuspension{std::make_shared<const MetricSpec>(of(*s.base)),
                                                                s.roof.max()});
                               }},
                    flow.kind());
}

double circle_gap(double a, double b) {
  const double d = std::abs(frac(a) - frac(b));
  return std::min(d, 1.0 - d);
}

Distance distance(const MetricSpec& metric, const PointGenerator& x, const PointGenerator& y, std::size_t horizon) {
  return std::visit(
      overloaded{[&](const MetricSpec::Symbolic&) {
                   require(horizon >= 1, "distance horizon must be >= 1");
                   constexpr std::size_t kChunk = 256;
                   Word a(kChunk), b(kChunk);
                   for (std::size_t start = 0; start < horizon; start += kChunk) {
                     const std::size_t len = std::min(kChunk, horizon - start);
                     x.symbols(start, std::span<Symbol>(a).first(len));
                     y.symbols(start, std::span<Symbol>(b).first(len));
                     for (std::size_t i = 0; i < len; ++i) {
                       if (a[i] != b[i]) return Distance{std::ldexp(1.0, -static_cast<int>(start + i)), false};
                     }
                   }
                   return Distance{0.0, true};
                 },
                 [&](const MetricSpec::Circle&) { return Distance{circle_gap(x.circle_coordinate(), y.circle_coordinate()), false}; },
                 [&](const MetricSpec::Torus& t) {
                   require(x.coords().size() == static_cast<std::size_t>(t.dim) && y.coords().size() == x.coords().size(),
                           "torus points have the wrong dimension");
                   double d = 0.0;
                   for (std::size_t i = 0; i < x.coords().size(); ++i) d = std::max(d, circle_gap(x.coords()[i], y.coords()[i]));
                   return Distance{d, false};
                 },
                 [&](const MetricSpec::OfSuspension& s) {
                   Distance base = distance(*s.base, x.with_fiber(std::nullopt), y.with_fiber(std::nullopt), horizon);
                   const double gap = std::abs(x.fiber().value_or(0.0) - y.fiber().value_or(0.0)) / s.roof_max;
                   return Distance{std::min(1.0, std::max(base.value, gap)), base.truncated};
                 },
                 [&](const MetricSpec::Union& u) {
                   require(!x.component().empty() && !y.component().empty(), "union points need component paths");
                   if (x.component()[0] != y.component()[0]) return Distance{1.0, false};
                   const MetricSpec& sub = x.component()[0] == 0 ? *u.left : *u.right;
                   return distance(sub, x.with_component(pop_front(x.component())),
                                   y.with_component(pop_front(y.component())), horizon);
                 }},
      metric.kind());
}

}  // namespace ergode
