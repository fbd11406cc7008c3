#include "ergode/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
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

constexpr double kMassTol = 1e-12;
constexpr std::uint64_t kWordBudget = std::uint64_t{1} << 26;
constexpr std::uint64_t kDfsBudget = 4'000'000;

void check_distribution(const std::vector<double>& p, const std::string& what) {
  require(!p.empty(), what + " must be nonempty");
  double total = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0, what + " entries must be nonnegative");
    total += v;
  }
  require(std::abs(total - 1.0) <= kMassTol, what + " must sum to 1");
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double frac(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

std::vector<double> solve_stationary(int k, const std::vector<double>& P) {
  const auto n = static_cast<std::size_t>(k);
  // rows 0..n-2 of (P^T - I) pi = 0, last row sum(pi) = 1
  std::vector<double> A(n * n), b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A[i * n + j] = P[j * n + i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) A[(n - 1) * n + j] = 1.0;
  b[n - 1] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    }
    require(std::abs(A[piv * n + col]) > 1e-14, "markov matrix has no unique stationary vector");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A[piv * n + j], A[col * n + j]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r * n + col] / A[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) A[r * n + j] -= f * A[col * n + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, b[i] / A[i * n + i]);
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

int symbolic_alphabet(const Measure& mu) {
  if (const auto* b = mu.as<Bernoulli>()) return static_cast<int>(b->probs.size());
  if (const auto* m = mu.as<Markov>()) return m->k;
  return 0;
}

// ------------------------------------------------------------------ integration

double integ(const Measure& mu, const Observable& phi, double fib);

double digit_quadrature(const Measure& mu, const Observable& phi, int* depth_out) {
  const int k = symbolic_alphabet(mu);
  int d = 1;
  std::uint64_t cells = static_cast<std::uint64_t>(k);
  while (cells * static_cast<std::uint64_t>(k) <= 4096) {
    cells *= static_cast<std::uint64_t>(k);
    ++d;
  }
  if (depth_out) *depth_out = d;
  const double cell = 1.0 / static_cast<double>(cells);
  return kernels::parallel::sum(cells, [&](std::uint64_t code) {
    Symbol buf[64];
    std::span<Symbol> w(buf, static_cast<std::size_t>(d));
    kernels::decode_word(code, k, w);
    const double m = cylinder_mass(mu, w);
    if (m == 0.0) return 0.0;
    PointView v;
    v.symbols = w;
    v.circle = (static_cast<double>(code) + 0.5) * cell;
    return m * phi.eval(v);
  });
}

double leaf_integral(const Measure& mu, const Observable& phi, double fib) {
  const bool symbolic = mu.as<Bernoulli>() || mu.as<Markov>();
  return std::visit(
      overloaded{[](const ConstantObs& c) { return c.c; },
                 [&](const CylinderIndicator& c) -> double {
                   if (!symbolic) throw Unsupported("cylinder observable against " + mu.describe());
                   return cylinder_mass(mu, c.word);
                 },
                 [&](const SymbolFrequency& s) -> double {
                   if (!symbolic) throw Unsupported("symbol observable against " + mu.describe());
                   const Symbol w[1] = {s.a};
                   return cylinder_mass(mu, w);
                 },
                 [&](const FiberProfile& f) { return profile_at(f.knots, fib) * leaf_integral(mu, *f.base, fib); },
                 [&](const OnComponentObs&) -> double {
                   throw Unsupported("component observable against a measure without a component: " + mu.describe());
                 },
                 [&](const Harmonic& h) -> double {
                   if (symbolic) {
                     require(h.axis == 0, "digit measures live on the circle");
                     return digit_quadrature(mu, phi, nullptr);
                   }
                   require(h.axis < mu.as<Lebesgue>()->dim, "harmonic axis outside the torus");
                   if (h.q == 0) return h.sine ? 0.0 : 1.0;
                   return 0.0;
                 },
                 [&](const CoordinateObs& c) -> double {
                   if (symbolic) {
                     require(c.axis == 0, "digit measures live on the circle");
                     return digit_quadrature(mu, phi, nullptr);
                   }
                   require(c.axis < mu.as<Lebesgue>()->dim, "coordinate axis outside the torus");
                   return 0.5;
                 }},
      phi.kind());
}

double shifted_integral(const Flow& flow, double t, const Measure& base, const Observable& phi, double fib);

double cylinder_roof_dfs(const Suspension& s, double t, const Measure& base, const Observable& phi, double fib) {
  const auto* bern = base.as<Bernoulli>();
  const auto* mark = base.as<Markov>();
  if (!bern && !mark) throw Unsupported("cylinder-roof pushforward needs a Bernoulli or Markov base: " + base.describe());
  const int k = symbolic_alphabet(base);
  const auto d = static_cast<std::size_t>(s.roof.depth());
  const std::size_t win = std::max<std::size_t>(phi.window(), 1);
  std::uint64_t nodes = 0;
  Word w;
  auto rec = [&](auto&& self, double mass) -> double {
    if (++nodes > kDfsBudget) throw BudgetExceeded("cylinder-roof pushforward enumeration budget exhausted");
    double tau = fib + t;
    std::size_t i = 0;
    bool complete = false;
    while (w.size() >= i + d) {
      const double r = s.roof.at(std::span<const Symbol>(w).subspan(i, d));
      if (tau < r) {
        complete = w.size() >= i + win;
        break;
      }
      tau -= r;
      ++i;
    }
    if (complete) {
      PointView v;
      v.symbols = std::span<const Symbol>(w).subspan(i);
      v.fiber = tau;
      return mass * phi.eval(v);
    }
    double total = 0.0;
    for (int a = 0; a < k; ++a) {
      double p;
      if (bern) {
        p = bern->probs[static_cast<std::size_t>(a)];
      } else if (w.empty()) {
        p = mark->pi[static_cast<std::size_t>(a)];
      } else {
        p = mark->P[static_cast<std::size_t>(w.back()) * static_cast<std::size_t>(k) + static_cast<std::size_t>(a)];
      }
      if (p == 0.0) continue;
      w.push_back(static_cast<Symbol>(a));
      total += self(self, mass * p);
      w.pop_back();
    }
    return total;
  };
  return rec(rec, 1.0);
}

double shifted_integral(const Flow& flow, double t, const Measure& base, const Observable& phi, double fib) {
  if (const auto* a = base.as<Atomic>()) {
    double total = 0.0;
    for (std::size_t i = 0; i < a->points.size(); ++i) {
      PointGenerator x = a->points[i];
      if (flow.as<Suspension>() && !x.fiber()) x = x.with_fiber(fib);
      total += a->weights[i] * phi.eval(time_t_map(flow, t, x));
    }
    return total;
  }
  if (const auto* m = base.as<Mixture>()) {
    double total = 0.0;
    for (std::size_t i = 0; i < m->parts.size(); ++i) total += m->weights[i] * shifted_integral(flow, t, *m->parts[i], phi, fib);
    return total;
  }
  if (const auto* ts = base.as<TimeShifted>()) return shifted_integral(flow, t + ts->t, *ts->base, phi, fib);
  if (const auto* ta = base.as<TimeAveraged>()) {
    double total = 0.0;
    for (int j = 0; j < ta->m; ++j) total += shifted_integral(flow, t + (j + 0.5) / ta->m, *ta->base, phi, fib);
    return total / ta->m;
  }
  if (flow.as<RotationFlow>() || flow.as<TorusTranslation>()) {
    if (base.as<Lebesgue>()) return integ(base, phi, fib);
    throw Unsupported("pushforward of " + base.describe() + " under " + flow.describe());
  }
  const auto& s = *flow.as<Suspension>();
  if (s.roof.depth() == 0) {
    // the base measure is shift invariant, so only the fiber position matters
    const double c = s.roof.values()[0];
    double tau = fib + t;
    tau -= std::floor(tau / c) * c;
    if (tau >= c || tau < 0.0) tau = 0.0;
    return integ(base, phi, tau);
  }
  return cylinder_roof_dfs(s, t, base, phi, fib);
}

double integ(const Measure& mu, const Observable& phi, double fib) {
  return std::visit(
      overloaded{[&](const Atomic& a) {
                   double total = 0.0;
                   for (std::size_t i = 0; i < a.points.size(); ++i) total += a.weights[i] * phi.eval(a.points[i]);
                   return total;
                 },
                 [&](const Mixture& m) {
                   double total = 0.0;
                   for (std::size_t i = 0; i < m.parts.size(); ++i) total += m.weights[i] * integ(*m.parts[i], phi, fib);
                   return total;
                 },
                 [&](const OnComponent& oc) {
                   return std::visit(overloaded{[](const ConstantObs& c) { return c.c; },
                                                [&](const OnComponentObs& o) {
                                                  return o.c == oc.c ? integ(*oc.inner, *o.inner, fib) : 0.0;
                                                },
                                                [&](const FiberProfile& f) {
                                                  return profile_at(f.knots, fib) * integ(mu, *f.base, fib);
                                                },
                                                [&](const auto&) { return integ(*oc.inner, phi, fib); }},
                                     phi.kind());
                 },
                 [&](const TimeShifted& ts) { return shifted_integral(*ts.flow, ts.t, *ts.base, phi, fib); },
                 [&](const TimeAveraged& ta) {
                   double total = 0.0;
                   for (int j = 0; j < ta.m; ++j) total += shifted_integral(*ta.flow, (j + 0.5) / ta.m, *ta.base, phi, fib);
                   return total / ta.m;
                 },
                 [&](const auto&) { return leaf_integral(mu, phi, fib); }},
      mu.kind());
}

double flow_quadrature_bound(const Flow& flow, const Observable& phi, int m) {
  double rate = phi.flow_lipschitz();
  if (const auto* t = flow.as<TorusTranslation>()) {
    double v = 0.0;
    for (double c : t->velocity) v = std::max(v, std::abs(c));
    rate *= v;
  }
  if (const auto* s = flow.as<Suspension>()) rate += 2.0 * phi.sup_norm() * (1.0 / s->roof.min() + 1.0);
  return rate / m;
}

double bound_of(const Measure& mu, const Observable& phi) {
  return std::visit(
      overloaded{[&](const Mixture& m) {
                   double total = 0.0;
                   for (std::size_t i = 0; i < m.parts.size(); ++i) total += m.weights[i] * bound_of(*m.parts[i], phi);
                   return total;
                 },
                 [&](const OnComponent& oc) { return bound_of(*oc.inner, phi); },
                 [&](const TimeShifted& ts) { return bound_of(*ts.base, phi); },
                 [&](const TimeAveraged& ta) { return flow_quadrature_bound(*ta.flow, phi, ta.m) + bound_of(*ta.base, phi); },
                 [&](const Bernoulli&) {
                   if (!phi.needs_coords()) return 0.0;
                   int d = 0;
                   digit_quadrature(mu, Observable::constant(0.0), &d);
                   const double step = std::pow(static_cast<double>(symbolic_alphabet(mu)), -d);
                   return std::max(phi.flow_lipschitz(), 1.0) * step * 0.5;
                 },
                 [&](const Markov&) {
                   if (!phi.needs_coords()) return 0.0;
                   int d = 0;
                   digit_quadrature(mu, Observable::constant(0.0), &d);
                   const double step = std::pow(static_cast<double>(symbolic_alphabet(mu)), -d);
                   return std::max(phi.flow_lipschitz(), 1.0) * step * 0.5;
                 },
                 [&](const auto&) { return 0.0; }},
      mu.kind());
}

}  // namespace

// ------------------------------------------------------------------ constructors

Measure Measure::bernoulli(std::vector<double> probs) {
  check_distribution(probs, "bernoulli probabilities");
  require(probs.size() >= 2 && probs.size() <= 256, "bernoulli needs 2..256 symbols");
  return Measure(Bernoulli{std::move(probs)});
}

Measure Measure::markov(const std::vector<std::vector<double>>& P) {
  const std::size_t k = P.size();
  require(k >= 2 && k <= 256, "markov matrix must be k x k with 2 <= k <= 256");
  Markov m;
  m.k = static_cast<int>(k);
  for (const auto& row : P) {
    require(row.size() == k, "markov matrix must be square");
    check_distribution(row, "markov matrix row");
    m.P.insert(m.P.end(), row.begin(), row.end());
  }
  m.pi = solve_stationary(m.k, m.P);
  for (std::size_t j = 0; j < k; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += m.pi[i] * m.P[i * k + j];
    require(std::abs(v - m.pi[j]) <= 1e-10, "markov stationary vector failed the pi P = pi check");
  }
  return Measure(std::move(m));
}

Measure Measure::lebesgue(int dim) {
  require(dim >= 1, "lebesgue dimension must be >= 1");
  return Measure(Lebesgue{dim});
}

Measure Measure::atomic(std::vector<PointGenerator> points, std::vector<double> weights) {
  require(!points.empty() && points.size() == weights.size(), "atomic measure needs matching points and weights");
  check_distribution(weights, "atomic weights");
  return Measure(Atomic{std::move(points), std::move(weights)});
}

Measure Measure::dirac(PointGenerator x) { return atomic({std::move(x)}, {1.0}); }

Measure Measure::mixture(std::vector<std::pair<Measure, double>> parts) {
  require(!parts.empty(), "mixture needs at least one part");
  Mixture m;
  for (auto& [mu, w] : parts) {
    m.parts.push_back(std::make_shared<const Measure>(std::move(mu)));
    m.weights.push_back(w);
  }
  check_distribution(m.weights, "mixture weights");
  return Measure(std::move(m));
}

Measure Measure::on_component(std::uint8_t c, Measure inner) {
  require(c <= 1, "component index must be 0 or 1");
  return Measure(OnComponent{c, std::make_shared<const Measure>(std::move(inner))});
}

bool Measure::is_ergodic_kind() const {
  return std::visit(overloaded{[](const Atomic& a) { return a.points.size() == 1; },
                               [](const Mixture& m) {
                                 const Measure* only = nullptr;
                                 for (std::size_t i = 0; i < m.parts.size(); ++i) {
                                   if (m.weights[i] == 0.0) continue;
                                   if (only) return false;
                                   only = m.parts[i].get();
                                 }
                                 return only && only->is_ergodic_kind();
                               },
                               [](const OnComponent& o) { return o.inner->is_ergodic_kind(); },
                               [](const TimeShifted& t) { return t.base->is_ergodic_kind(); },
                               [](const TimeAveraged& t) { return t.base->is_ergodic_kind(); },
                               [](const auto&) { return true; }},
                    kind_);
}

double Measure::total_mass() const {
  return std::visit(overloaded{[](const Atomic& a) {
                                 double t = 0.0;
                                 for (double w : a.weights) t += w;
                                 return t;
                               },
                               [](const Mixture& m) {
                                 double t = 0.0;
                                 for (std::size_t i = 0; i < m.parts.size(); ++i) t += m.weights[i] * m.parts[i]->total_mass();
                                 return t;
                               },
                               [](const Bernoulli& b) {
                                 double t = 0.0;
                                 for (double p : b.probs) t += p;
                                 return t;
                               },
                               [](const Markov& m) {
                                 double t = 0.0;
                                 for (double p : m.pi) t += p;
                                 return t;
                               },
                               [](const OnComponent& o) { return o.inner->total_mass(); },
                               [](const TimeShifted& t) { return t.base->total_mass(); },
                               [](const TimeAveraged& t) { return t.base->total_mass(); },
                               [](const Lebesgue&) { return 1.0; }},
                    kind_);
}

std::string Measure::describe() const {
  auto list = [](const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
  };
  return std::visit(overloaded{[&](const Bernoulli& b) { return "bernoulli(" + list(b.probs) + ")"; },
                               [&](const Markov& m) { return "markov(" + list(m.P) + ")"; },
                               [](const Lebesgue& l) { return "lebesgue(dim=" + std::to_string(l.dim) + ")"; },
                               [](const Atomic& a) { return "atomic(" + std::to_string(a.points.size()) + " atoms)"; },
                               [&](const Mixture& m) {
                                 std::string s = "mixture(";
                                 for (std::size_t i = 0; i < m.parts.size(); ++i) {
                                   std::ostringstream w;
                                   w << m.weights[i];
                                   s += (i ? "," : "") + w.str() + "*" + m.parts[i]->describe();
                                 }
                                 return s + ")";
                               },
                               [](const OnComponent& o) {
                                 return "on" + std::to_string(o.c) + "(" + o.inner->describe() + ")";
                               },
                               [](const TimeShifted& t) {
                                 std::ostringstream os;
                                 os << "shifted(t=" << t.t << "," << t.base->describe() << ")";
                                 return os.str();
                               },
                               [](const TimeAveraged& t) {
                                 return "time_averaged(m=" + std::to_string(t.m) + "," + t.base->describe() + ")";
                               }},
                    kind_);
}

// ------------------------------------------------------------------ operations

double integrate(const Measure& mu, const Observable& phi) { return integ(mu, phi, 0.0); }

Integral integrate_with_bound(const Measure& mu, const Observable& phi) {
  return Integral{integ(mu, phi, 0.0), bound_of(mu, phi)};
}

double cylinder_mass(const Measure& mu, std::span<const Symbol> word, const ComponentPath& path) {
  return std::visit(
      overloaded{[&](const Bernoulli& b) {
                   double m = 1.0;
                   for (auto s : word) m *= s < b.probs.size() ? b.probs[s] : 0.0;
                   return m;
                 },
                 [&](const Markov& mk) {
                   if (word.empty()) return 1.0;
                   const auto k = static_cast<std::size_t>(mk.k);
                   for (auto s : word) {
                     if (s >= k) return 0.0;
                   }
                   double m = mk.pi[word[0]];
                   for (std::size_t i = 1; i < word.size() && m > 0.0; ++i) m *= mk.P[word[i - 1] * k + word[i]];
                   return m;
                 },
                 [&](const Atomic& a) {
                   double m = 0.0;
                   for (std::size_t i = 0; i < a.points.size(); ++i) {
                     const auto& x = a.points[i];
                     require(x.is_symbolic(), "cylinder mass of an atomic measure needs symbolic atoms");
                     if (x.component() != path) continue;
                     if (std::equal(word.begin(), word.end(), x.prefix(word.size()).begin())) m += a.weights[i];
                   }
                   return m;
                 },
                 [&](const Mixture& mx) {
                   double m = 0.0;
                   for (std::size_t i = 0; i < mx.parts.size(); ++i) m += mx.weights[i] * cylinder_mass(*mx.parts[i], word, path);
                   return m;
                 },
                 [&](const OnComponent& oc) {
                   if (path.empty() || path[0] != oc.c) return 0.0;
                   return cylinder_mass(*oc.inner, word, ComponentPath(path.begin() + 1, path.end()));
                 },
                 [&](const auto&) -> double { throw Unsupported("cylinder masses of " + mu.describe()); }},
      mu.kind());
}

Measure pushforward(const Flow& flow, double t, const Measure& mu) {
  require(std::isfinite(t), "pushforward time must be finite");
  if (t < 0.0) require(flow.is_invertible(), "negative time on a non-invertible flow");
  if (t == 0.0) return mu;
  if (const auto* a = mu.as<Atomic>()) {
    std::vector<PointGenerator> pts;
    pts.reserve(a->points.size());
    for (const auto& x : a->points) {
      PointGenerator p = x;
      if (flow.as<Suspension>() && !p.fiber()) p = p.with_fiber(0.0);
      pts.push_back(time_t_map(flow, t, p));
    }
    return Measure(Atomic{std::move(pts), a->weights});
  }
  if (mu.as<Lebesgue>() && !flow.as<Suspension>()) return mu;
  if (const auto* m = mu.as<Mixture>()) {
    Mixture out;
    out.weights = m->weights;
    for (const auto& p : m->parts) out.parts.push_back(std::make_shared<const Measure>(pushforward(flow, t, *p)));
    return Measure(std::move(out));
  }
  if (const auto* ts = mu.as<TimeShifted>()) {
    return Measure(TimeShifted{ts->flow, ts->t + t, ts->base});
  }
  return Measure(TimeShifted{std::make_shared<const Flow>(flow), t, std::make_shared<const Measure>(mu)});
}

Measure time_average_measure(const Flow& flow, const Measure& mu, int m) {
  require(m >= 1, "time average needs m >= 1");
  if (const auto* a = mu.as<Atomic>()) {
    std::vector<PointGenerator> pts;
    std::vector<double> w;
    for (std::size_t i = 0; i < a->points.size(); ++i) {
      PointGenerator x = a->points[i];
      if (flow.as<Suspension>() && !x.fiber()) x = x.with_fiber(0.0);
      for (int j = 0; j < m; ++j) {
        pts.push_back(time_t_map(flow, (j + 0.5) / m, x));
        w.push_back(a->weights[i] / m);
      }
    }
    return Measure(Atomic{std::move(pts), std::move(w)});
  }
  return Measure(TimeAveraged{std::make_shared<const Flow>(flow), std::make_shared<const Measure>(mu), m});
}

std::vector<double> family_integrals(const Measure& mu, const TestFamily& fam) {
  std::vector<double> out(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) out[i] = integrate(mu, fam.observables[i]);
  return out;
}

double weak_star_distance(const std::vector<double>& a, const std::vector<double>& b, const TestFamily& fam) {
  require(a.size() == fam.size() && b.size() == fam.size(), "integral vectors do not match the family");
  double total = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    total += fam.weights[i] * d / (1.0 + d);
  }
  return total;
}

double weak_star_distance(const Measure& mu, const Measure& nu, const TestFamily& fam) {
  return weak_star_distance(family_integrals(mu, fam), family_integrals(nu, fam), fam);
}

// ------------------------------------------------------------------ entropy

bool check_invariant(const Measure& mu, const System& system) {
  return std::visit(
      overloaded{[&](const Bernoulli& b) {
                   const System& s = system;
                   if (const auto* cm = s.as<CircleMult>()) {
                     require(static_cast<int>(b.probs.size()) == cm->n, "bernoulli digit measure must have n symbols");
                     return true;
                   }
                   require(s.is_symbolic() && !s.as<DisjointUnion>(), "bernoulli measure needs a shift: " + s.describe());
                   require(static_cast<int>(b.probs.size()) == s.alphabet_size(), "bernoulli alphabet does not match the shift");
                   for (std::size_t a = 0; a < b.probs.size(); ++a) {
                     for (std::size_t c = 0; c < b.probs.size(); ++c) {
                       if (b.probs[a] > 0 && b.probs[c] > 0) {
                         require(s.allowed(static_cast<Symbol>(a), static_cast<Symbol>(c)),
                                 "bernoulli measure charges forbidden transitions of " + s.describe());
                       }
                     }
                   }
                   return true;
                 },
                 [&](const Markov& m) {
                   if (const auto* cm = system.as<CircleMult>()) {
                     require(m.k == cm->n, "markov digit measure must have n symbols");
                     return true;
                   }
                   require(system.is_symbolic() && !system.as<DisjointUnion>(), "markov measure needs a shift");
                   require(m.k == system.alphabet_size(), "markov alphabet does not match the shift");
                   for (int a = 0; a < m.k; ++a) {
                     for (int c = 0; c < m.k; ++c) {
                       if (m.P[static_cast<std::size_t>(a * m.k + c)] > 0) {
                         require(system.allowed(static_cast<Symbol>(a), static_cast<Symbol>(c)),
                                 "markov measure charges forbidden transitions of " + system.describe());
                       }
                     }
                   }
                   return true;
                 },
                 [&](const Lebesgue& l) {
                   require(system.is_circle() && l.dim == 1, "lebesgue measure needs a circle system");
                   return true;
                 },
                 [&](const Atomic&) { return false; },
                 [&](const Mixture& mx) {
                   bool all = true;
                   for (const auto& p : mx.parts) all = check_invariant(*p, system) && all;
                   return all;
                 },
                 [&](const OnComponent& oc) {
                   const auto* u = system.as<DisjointUnion>();
                   require(u != nullptr, "component measure needs a disjoint union");
                   return check_invariant(*oc.inner, oc.c == 0 ? *u->left : *u->right);
                 },
                 [&](const auto&) -> bool { throw ValidationError("flow measure checked against a map: " + mu.describe()); }},
      mu.kind());
}

namespace {

EntropyValue exact(double v) { return EntropyValue{v, v, v, false, false, {}}; }

EntropyValue map_entropy(const Measure& mu, const System& system) {
  return std::visit(
      overloaded{[&](const Bernoulli& b) {
                   double h = 0.0;
                   for (double p : b.probs) h -= xlogx(p);
                   return exact(h);
                 },
                 [&](const Markov& m) {
                   double h = 0.0;
                   const auto k = static_cast<std::size_t>(m.k);
                   for (std::size_t i = 0; i < k; ++i) {
                     for (std::size_t j = 0; j < k; ++j) h -= m.pi[i] * xlogx(m.P[i * k + j]);
                   }
                   return exact(h);
                 },
                 [&](const Lebesgue&) {
                   if (const auto* cm = system.as<CircleMult>()) return exact(std::log(static_cast<double>(cm->n)));
                   return exact(0.0);
                 },
                 [&](const Atomic&) {
                   EntropyValue e = partition_entropy_estimate(mu, system, 12);
                   e.warning = true;
                   e.note = "atomic measure: partition estimate, invariance not checked";
                   return e;
                 },
                 [&](const Mixture& mx) {
                   EntropyValue out;
                   for (std::size_t i = 0; i < mx.parts.size(); ++i) {
                     const EntropyValue e = map_entropy(*mx.parts[i], system);
                     out.value += mx.weights[i] * e.value;
                     out.lower += mx.weights[i] * e.lower;
                     out.upper += mx.weights[i] * e.upper;
                     out.estimated = out.estimated || e.estimated;
                     out.warning = out.warning || e.warning;
                   }
                   return out;
                 },
                 [&](const OnComponent& oc) {
                   const auto* u = system.as<DisjointUnion>();
                   require(u != nullptr, "component measure needs a disjoint union");
                   return map_entropy(*oc.inner, oc.c == 0 ? *u->left : *u->right);
                 },
                 [&](const auto&) -> EntropyValue {
                   throw ValidationError("flow measure passed to map entropy: " + mu.describe());
                 }},
      mu.kind());
}

}  // namespace

EntropyValue metric_entropy(const Measure& mu, const System& system) {
  check_invariant(mu, system);
  return map_entropy(mu, system);
}

EntropyValue metric_entropy(const Measure& mu, const Flow& flow) {
  if (const auto* mx = mu.as<Mixture>()) {
    EntropyValue out;
    for (std::size_t i = 0; i < mx->parts.size(); ++i) {
      const EntropyValue e = metric_entropy(*mx->parts[i], flow);
      out.value += mx->weights[i] * e.value;
      out.lower += mx->weights[i] * e.lower;
      out.upper += mx->weights[i] * e.upper;
      out.estimated = out.estimated || e.estimated;
      out.warning = out.warning || e.warning;
    }
    return out;
  }
  if (const auto* ta = mu.as<TimeAveraged>()) return metric_entropy(*ta->base, flow);
  if (const auto* ts = mu.as<TimeShifted>()) return metric_entropy(*ts->base, flow);
  if (mu.as<Atomic>()) {
    EntropyValue e = exact(0.0);
    e.warning = true;
    e.note = "finitely many atoms";
    return e;
  }
  if (flow.as<RotationFlow>() || flow.as<TorusTranslation>()) {
    require(mu.as<Lebesgue>() != nullptr, "rotation and translation flows carry lebesgue or atomic measures");
    return exact(0.0);
  }
  const auto& s = *flow.as<Suspension>();
  EntropyValue base = metric_entropy(mu, *s.base);
  // Abramov: h(phi^1) = h(base) / integral of the roof
  double mean_roof = s.roof.values()[0];
  if (s.roof.depth() > 0) {
    const int k = s.roof.alphabet();
    const int d = s.roof.depth();
    std::uint64_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= static_cast<std::uint64_t>(k);
    mean_roof = 0.0;
    Word w(static_cast<std::size_t>(d));
    for (std::uint64_t code = 0; code < cells; ++code) {
      kernels::decode_word(code, k, w);
      mean_roof += cylinder_mass(mu, w) * s.roof.values()[code];
    }
  }
  base.value /= mean_roof;
  base.lower /= mean_roof;
  base.upper /= mean_roof;
  return base;
}

double cylinder_partition_entropy(const Measure& mu, const System& system, int depth, bool use_parallel) {
  require(depth >= 0 && depth <= 60, "partition depth must be in [0, 60]");
  double total = 0.0;
  for (const auto& path : system.leaf_paths()) {
    const System& leaf = system.leaf(path);
    const int k = leaf.alphabet_size();
    std::uint64_t cells = 1;
    for (int i = 0; i < depth; ++i) {
      cells *= static_cast<std::uint64_t>(k);
      if (cells > kWordBudget) throw BudgetExceeded("cylinder partition too large at depth " + std::to_string(depth));
    }
    auto mass = [&](std::span<const Symbol> w) { return cylinder_mass(mu, w, path); };
    total += use_parallel ? kernels::word_entropy_parallel(k, depth, mass) : kernels::word_entropy_serial(k, depth, mass);
  }
  return total;
}

namespace {

// Fiber-half distribution of a measure on a unit-roof suspension, as
// (weight, fiber) pairs attached to the invariant base part.
void fiber_atoms(const Measure& mu, double shift, std::vector<std::pair<double, double>>& out, double weight) {
  if (const auto* ta = mu.as<TimeAveraged>()) {
    for (int j = 0; j < ta->m; ++j) fiber_atoms(*ta->base, shift + (j + 0.5) / ta->m, out, weight / ta->m);
    return;
  }
  if (const auto* ts = mu.as<TimeShifted>()) {
    fiber_atoms(*ts->base, shift + ts->t, out, weight);
    return;
  }
  out.emplace_back(weight, frac(shift));
}

const Measure& invariant_part(const Measure& mu) {
  if (const auto* ta = mu.as<TimeAveraged>()) return invariant_part(*ta->base);
  if (const auto* ts = mu.as<TimeShifted>()) return invariant_part(*ts->base);
  return mu;
}

double rotation_partition_entropy(double theta, int n) {
  std::vector<double> cuts;
  for (int j = 0; j < n; ++j) {
    cuts.push_back(frac(-j * theta));
    cuts.push_back(frac(0.5 - j * theta));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), cuts.end());
  double h = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double next = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + 1.0;
    h -= xlogx(next - cuts[i]);
  }
  return h;
}

}  // namespace

EntropyValue partition_entropy_estimate(const Measure& mu, const MapDynamics& dyn, int depth) {
  require(depth >= 1, "partition depth must be >= 1");
  EntropyValue out;
  out.estimated = true;
  auto finish = [&](double hn, double hprev) {
    out.value = hn / depth;
    out.upper = out.value;
    out.lower = std::min(out.value, std::max(0.0, hn - hprev));
    return out;
  };

  if (const auto* sys = std::get_if<System>(&dyn)) {
    if (sys->is_symbolic()) {
      return finish(cylinder_partition_entropy(mu, *sys, depth), cylinder_partition_entropy(mu, *sys, depth - 1));
    }
    if (const auto* cm = sys->as<CircleMult>()) {
      if (mu.as<Lebesgue>()) {
        const double v = std::log(static_cast<double>(cm->n));
        out.value = out.lower = out.upper = v;
        return out;
      }
      const System digits = System::full_shift(cm->n);
      return finish(cylinder_partition_entropy(mu, digits, depth), cylinder_partition_entropy(mu, digits, depth - 1));
    }
    const auto* rot = sys->as<CircleRotation>();
    require(rot && mu.as<Lebesgue>(), "rotation partition estimate needs lebesgue measure");
    out.warning = true;
    out.note = "two-arc partition, estimate only";
    return finish(rotation_partition_entropy(rot->theta, depth), rotation_partition_entropy(rot->theta, depth - 1));
  }

  const auto& tm = std::get<TimeMap>(dyn);
  const auto* s = tm.flow->as<Suspension>();
  require(s && s->roof.depth() == 0 && s->roof.values()[0] == 1.0 && tm.t == 1.0 && s->base->is_symbolic(),
          "suspension partition estimate supports the time-one map of a unit-roof suspension over a shift");
  // cells [w] x [0,1/2) and [w] x [1/2,1); the time-one map keeps the fiber fixed
  auto joint = [&](int n) {
    if (const auto* a = mu.as<Atomic>()) {
      double h = 0.0;
      for (const auto& path : s->base->leaf_paths()) {
        const int k = s->base->leaf(path).alphabet_size();
        for (int half = 0; half < 2; ++half) {
          auto mass = [&](std::span<const Symbol> w) {
            double m = 0.0;
            for (std::size_t i = 0; i < a->points.size(); ++i) {
              const auto& x = a->points[i];
              if (x.component() != path) continue;
              if ((x.fiber().value_or(0.0) >= 0.5 ? 1 : 0) != half) continue;
              const Word p = x.prefix(static_cast<std::size_t>(n));
              if (std::equal(w.begin(), w.end(), p.begin())) m += a->weights[i];
            }
            return m;
          };
          h += kernels::word_entropy_parallel(k, n, mass);
        }
      }
      return h;
    }
    std::vector<std::pair<double, double>> fibers;
    fiber_atoms(mu, 0.0, fibers, 1.0);
    double low = 0.0;
    for (const auto& [w, f] : fibers) low += f < 0.5 ? w : 0.0;
    const double hf = -xlogx(low) - xlogx(1.0 - low);
    return cylinder_partition_entropy(invariant_part(mu), *s->base, n) + hf;
  };
  return finish(joint(depth), joint(depth - 1));
}

}  // namespace ergode
