#include "ergode/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
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

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_slope(const std::vector<std::pair<double, double>>& knots) {
  double m = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double dx = knots[i].first - knots[i - 1].first;
    if (dx > 0.0) m = std::max(m, std::abs(knots[i].second - knots[i - 1].second) / dx);
  }
  return m;
}

double max_abs(const std::vector<std::pair<double, double>>& knots) {
  double m = 0.0;
  for (const auto& [x, y] : knots) m = std::max(m, std::abs(y));
  return m;
}

}  // namespace

Observable Observable::constant(double c) {
  require(std::isfinite(c), "constant observable must be finite");
  return Observable(ConstantObs{c});
}

Observable Observable::coordinate(int axis) {
  require(axis >= 0, "coordinate axis must be >= 0");
  return Observable(CoordinateObs{axis});
}

Observable Observable::cylinder(Word w) {
  require(!w.empty(), "cylinder word must be nonempty");
  return Observable(CylinderIndicator{std::move(w)});
}

Observable Observable::symbol_frequency(Symbol a) { return Observable(SymbolFrequency{a}); }

Observable Observable::harmonic(int q, bool sine, int axis) {
  require(q >= 0 && axis >= 0, "harmonic frequency and axis must be >= 0");
  return Observable(Harmonic{q, sine, axis});
}

Observable Observable::fiber_profile(Observable base, std::vector<std::pair<double, double>> knots) {
  require(!knots.empty(), "fiber profile needs at least one knot");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(knots[i].first > knots[i - 1].first, "fiber profile knots must be strictly increasing");
  }
  require(!base.uses_fiber(), "fiber profile base must not depend on the fiber");
  return Observable(FiberProfile{std::make_shared<const Observable>(std::move(base)), std::move(knots)});
}

Observable Observable::on_component(std::uint8_t c, Observable inner) {
  require(c <= 1, "component index must be 0 or 1");
  return Observable(OnComponentObs{c, std::make_shared<const Observable>(std::move(inner))});
}

double profile_at(const std::vector<std::pair<double, double>>& knots, double s) {
  if (s <= knots.front().first) return knots.front().second;
  if (s >= knots.back().first) return knots.back().second;
  auto it = std::upper_bound(knots.begin(), knots.end(), s,
                             [](double v, const std::pair<double, double>& k) { return v < k.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (s - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

double profile_integral(const std::vector<std::pair<double, double>>& knots, double a, double b) {
  if (b <= a) return 0.0;
  // breakpoints inside (a, b), then trapezoid per linear piece (exact)
  std::vector<double> xs{a};
  for (const auto& k : knots) {
    if (k.first > a && k.first < b) xs.push_back(k.first);
  }
  xs.push_back(b);
  double total = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    total += 0.5 * (xs[i] - xs[i - 1]) * (profile_at(knots, xs[i - 1]) + profile_at(knots, xs[i]));
  }
  return total;
}

double Observable::eval(const PointView& v) const {
  return std::visit(
      overloaded{[](const ConstantObs& c) { return c.c; },
                 [&](const CoordinateObs& c) {
                   if (c.axis == 0 && v.coords.empty()) return v.circle;
                   require(static_cast<std::size_t>(c.axis) < v.coords.size(), "coordinate axis out of range");
                   return v.coords[static_cast<std::size_t>(c.axis)];
                 },
                 [&](const CylinderIndicator& c) {
                   for (std::size_t i = 0; i < c.word.size(); ++i) {
                     if (v.symbols[i] != c.word[i]) return 0.0;
                   }
                   return 1.0;
                 },
                 [&](const SymbolFrequency& s) { return v.symbols[0] == s.a ? 1.0 : 0.0; },
                 [&](const Harmonic& h) {
                   double x = v.circle;
                   if (!v.coords.empty()) {
                     require(static_cast<std::size_t>(h.axis) < v.coords.size(), "harmonic axis out of range");
                     x = v.coords[static_cast<std::size_t>(h.axis)];
                   }
                   const double a = kTwoPi * h.q * x;
                   return h.sine ? std::sin(a) : std::cos(a);
                 },
                 [&](const FiberProfile& f) {
                   return f.base->eval(v) * profile_at(f.knots, v.fiber.value_or(0.0));
                 },
                 [&](const OnComponentObs& o) {
                   require(!v.component.empty(), "component observable on a point without a component path");
                   if (v.component[0] != o.c) return 0.0;
                   PointView inner = v;
                   inner.component = v.component.subspan(1);
                   return o.inner->eval(inner);
                 }},
      kind_);
}

double Observable::eval(const PointGenerator& x) const {
  Word buf;
  PointView v;
  if (x.is_symbolic()) {
    buf = x.prefix(std::max<std::size_t>(window(), 1));
    v.symbols = buf;
    if (x.digit_base() >= 2 && needs_coords()) v.circle = x.circle_coordinate();
  } else {
    v.coords = x.coords();
    v.circle = x.coords()[0];
  }
  v.component = x.component();
  v.fiber = x.fiber();
  return eval(v);
}

std::size_t Observable::window() const {
  return std::visit(overloaded{[](const CylinderIndicator& c) { return c.word.size(); },
                               [](const SymbolFrequency&) { return std::size_t{1}; },
                               [](const FiberProfile& f) { return f.base->window(); },
                               [](const OnComponentObs& o) { return o.inner->window(); },
                               [](const auto&) { return std::size_t{0}; }},
                    kind_);
}

bool Observable::needs_symbols() const { return window() > 0; }

bool Observable::needs_coords() const {
  return std::visit(overloaded{[](const CoordinateObs&) { return true; },
                               [](const Harmonic& h) { return h.q != 0; },
                               [](const FiberProfile& f) { return f.base->needs_coords(); },
                               [](const OnComponentObs& o) { return o.inner->needs_coords(); },
                               [](const auto&) { return false; }},
                    kind_);
}

bool Observable::uses_fiber() const {
  return std::visit(overloaded{[](const FiberProfile&) { return true; },
                               [](const OnComponentObs& o) { return o.inner->uses_fiber(); },
                               [](const auto&) { return false; }},
                    kind_);
}

double Observable::sup_norm() const {
  return std::visit(overloaded{[](const ConstantObs& c) { return std::abs(c.c); },
                               [](const FiberProfile& f) { return f.base->sup_norm() * max_abs(f.knots); },
                               [](const OnComponentObs& o) { return o.inner->sup_norm(); },
                               [](const auto&) { return 1.0; }},
                    kind_);
}

double Observable::flow_lipschitz() const {
  return std::visit(overloaded{[](const CoordinateObs&) { return 1.0; },
                               [](const Harmonic& h) { return kTwoPi * h.q; },
                               [](const FiberProfile& f) { return f.base->sup_norm() * max_slope(f.knots); },
                               [](const OnComponentObs& o) { return o.inner->flow_lipschitz(); },
                               [](const auto&) { return 0.0; }},
                    kind_);
}

double Observable::flow_second_derivative() const {
  return std::visit(overloaded{[](const Harmonic& h) { return kTwoPi * h.q * kTwoPi * h.q; },
                               [](const OnComponentObs& o) { return o.inner->flow_second_derivative(); },
                               [](const auto&) { return 0.0; }},
                    kind_);
}

std::string Observable::describe() const {
  return std::visit(overloaded{[](const ConstantObs& c) {
                                 std::ostringstream os;
                                 os << "const(" << c.c << ")";
                                 return os.str();
                               },
                               [](const CoordinateObs& c) { return "coord(" + std::to_string(c.axis) + ")"; },
                               [](const CylinderIndicator& c) {
                                 std::string s = "cyl(";
                                 for (auto a : c.word) s += std::to_string(a);
                                 return s + ")";
                               },
                               [](const SymbolFrequency& s) { return "freq(" + std::to_string(s.a) + ")"; },
                               [](const Harmonic& h) {
                                 std::string s = std::string(h.sine ? "sin" : "cos") + "(q=" + std::to_string(h.q);
                                 if (h.axis) s += ",axis=" + std::to_string(h.axis);
                                 return s + ")";
                               },
                               [](const FiberProfile& f) {
                                 std::ostringstream os;
                                 os << f.base->describe() << "*profile[";
                                 for (std::size_t i = 0; i < f.knots.size(); ++i) {
                                   if (i) os << ';';
                                   os << f.knots[i].first << ':' << f.knots[i].second;
                                 }
                                 os << ']';
                                 return os.str();
                               },
                               [](const OnComponentObs& o) {
                                 return "on" + std::to_string(o.c) + "(" + o.inner->describe() + ")";
                               }},
                    kind_);
}

// ---------------------------------------------------------------- TestFamily

TestFamily TestFamily::from(std::vector<Observable> obs) {
  TestFamily f;
  f.weights.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) f.weights[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  f.observables = std::move(obs);
  return f;
}

namespace {

std::vector<Observable> shift_family(const System& s, int depth) {
  const int k = s.alphabet_size();
  std::vector<Observable> out;
  for (int a = 0; a < k; ++a) out.push_back(Observable::symbol_frequency(static_cast<Symbol>(a)));
  std::vector<Word> words;
  for (int a = 0; a < k; ++a) words.push_back({static_cast<Symbol>(a)});
  for (int d = 2; d <= depth; ++d) {
    std::vector<Word> next;
    for (const auto& w : words) {
      for (int a = 0; a < k; ++a) {
        if (!s.allowed(w.back(), static_cast<Symbol>(a))) continue;
        Word v = w;
        v.push_back(static_cast<Symbol>(a));
        next.push_back(std::move(v));
      }
    }
    words = std::move(next);
    for (const auto& w : words) out.push_back(Observable::cylinder(w));
  }
  return out;
}

std::vector<Observable> harmonic_family(int harmonics, int dims) {
  std::vector<Observable> out;
  for (int q = 1; q <= harmonics; ++q) {
    for (int axis = 0; axis < dims; ++axis) {
      out.push_back(Observable::harmonic(q, false, axis));
      out.push_back(Observable::harmonic(q, true, axis));
    }
  }
  return out;
}

std::vector<Observable> system_family(const System& s, int depth, int harmonics) {
  if (const auto* u = s.as<DisjointUnion>()) {
    std::vector<Observable> out{Observable::on_component(0, Observable::constant(1.0)),
                                Observable::on_component(1, Observable::constant(1.0))};
    auto left = system_family(*u->left, depth, harmonics);
    auto right = system_family(*u->right, depth, harmonics);
    const std::size_t n = std::max(left.size(), right.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i < left.size()) out.push_back(Observable::on_component(0, left[i]));
      if (i < right.size()) out.push_back(Observable::on_component(1, right[i]));
    }
    return out;
  }
  if (s.is_symbolic()) return shift_family(s, depth);
  return harmonic_family(harmonics, 1);
}

}  // namespace

TestFamily TestFamily::for_system(const System& system, int depth, int harmonics) {
  require(depth >= 1 && harmonics >= 1, "test family depth and harmonic count must be >= 1");
  return from(system_family(system, depth, harmonics));
}

TestFamily TestFamily::for_flow(const Flow& flow, int depth, int harmonics) {
  require(depth >= 1 && harmonics >= 1, "test family depth and harmonic count must be >= 1");
  if (flow.as<RotationFlow>()) return from(harmonic_family(harmonics, 1));
  if (const auto* t = flow.as<TorusTranslation>()) {
    return from(harmonic_family(std::max(1, harmonics / 2), static_cast<int>(t->velocity.size())));
  }
  const auto& s = *flow.as<Suspension>();
  const double r = s.roof.min();
  std::vector<Observable> out;
  for (const auto& b : system_family(*s.base, depth, harmonics)) {
    out.push_back(b);
    out.push_back(Observable::fiber_profile(b, {{0.0, 0.0}, {0.5 * r, 1.0}, {r, 0.0}}));
  }
  return from(std::move(out));
}

}  // namespace ergode
