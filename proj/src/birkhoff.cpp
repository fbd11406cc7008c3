#include "ergode/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <unordered_map>

#include "ergode/errors.hpp"
#include "ergode/kernels.hpp"

namespace ergode {

namespace {

using Knots = std::vector<std::pair<double, double>>;

constexpr std::uint64_t kChunkSteps = 1u << 16;
constexpr std::uint64_t kTableBudget = 1u << 20;

double frac(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

// An observable on a symbolic orbit of fixed component, written as
// table[code of the next D symbols] * profile(fiber).
struct Factored {
  std::vector<double> table;
  const Knots* profile = nullptr;
};

std::optional<Factored> factor(const Observable& o, std::span<const std::uint8_t> path, int k, int D) {
  if (const auto* oc = o.as<OnComponentObs>()) {
    if (path.empty()) return std::nullopt;
    if (path[0] != oc->c) {
      Factored z;
      z.table.assign(static_cast<std::size_t>(std::pow(k, D) + 0.5), 0.0);
      return z;
    }
    return factor(*oc->inner, path.subspan(1), k, D);
  }
  if (const auto* fp = o.as<FiberProfile>()) {
    auto f = factor(*fp->base, path, k, D);
    if (!f) return std::nullopt;
    if (f->profile) return std::nullopt;
    f->profile = &fp->knots;
    return f;
  }
  if (o.needs_coords()) return std::nullopt;
  std::uint64_t cells = 1;
  for (int i = 0; i < D; ++i) cells *= static_cast<std::uint64_t>(k);
  Factored f;
  f.table.resize(cells);
  Word w(static_cast<std::size_t>(D));
  for (std::uint64_t code = 0; code < cells; ++code) {
    kernels::decode_word(code, k, w);
    PointView v;
    v.symbols = w;
    v.component = path;
    f.table[code] = o.eval(v);
  }
  return f;
}

// Sliding window over a point's symbol stream.
class SymbolCursor {
 public:
  SymbolCursor(PointGenerator x, std::size_t need) : x_(std::move(x)), need_(need) {}
  const Symbol* at(std::uint64_t m) {
    if (buf_.empty() || m < start_ || m + need_ > start_ + buf_.size()) {
      buf_.resize(kChunkSteps + need_);
      start_ = m;
      x_.symbols(m, buf_);
    }
    return buf_.data() + (m - start_);
  }

 private:
  PointGenerator x_;
  std::size_t need_;
  Word buf_;
  std::uint64_t start_ = 0;
};

// Positions (base index, fiber) of a symbolic orbit under a shift or under
// the time-t map of a suspension over a shift.
class SymbolicOrbit {
 public:
  SymbolicOrbit(const MapDynamics& dyn, const PointGenerator& x, std::size_t window)
      : cursor_(x.with_fiber(std::nullopt), std::max<std::size_t>(window, 1) + 16) {
    if (const auto* tm = std::get_if<TimeMap>(&dyn)) {
      susp_ = tm->flow->as<Suspension>();
      t_ = tm->t;
      fib0_ = x.fiber().value_or(0.0);
      fib_ = fib0_;
    }
  }
  // state at step j, called with j = 0, 1, 2, ... in order
  std::pair<std::uint64_t, double> next(std::uint64_t j) {
    if (!susp_) return {j, 0.0};
    if (susp_->roof.depth() == 0) {
      const double c = susp_->roof.values()[0];
      double s = fib0_ + static_cast<double>(j) * t_;
      double m = std::floor(s / c);
      s -= m * c;
      if (s >= c) {
        s -= c;
        m += 1.0;
      }
      if (s < 0.0) {
        s += c;
        m -= 1.0;
      }
      return {static_cast<std::uint64_t>(m), s};
    }
    if (j > 0) {
      fib_ += t_;
      const auto d = static_cast<std::size_t>(susp_->roof.depth());
      double r = susp_->roof.at(std::span<const Symbol>(cursor_.at(m_), d));
      while (fib_ >= r) {
        fib_ -= r;
        ++m_;
        r = susp_->roof.at(std::span<const Symbol>(cursor_.at(m_), d));
      }
    }
    return {m_, fib_};
  }
  const Symbol* symbols_at(std::uint64_t m) { return cursor_.at(m); }

 private:
  SymbolCursor cursor_;
  const Suspension* susp_ = nullptr;
  double t_ = 0.0;
  double fib0_ = 0.0;
  double fib_ = 0.0;
  std::uint64_t m_ = 0;
};

bool symbolic_orbit(const MapDynamics& dyn, const PointGenerator& x, int* k) {
  if (!x.is_symbolic()) return false;
  if (const auto* s = std::get_if<System>(&dyn)) {
    const System& leaf = s->leaf(x.component());
    if (!leaf.is_symbolic()) return false;
    *k = leaf.alphabet_size();
    return true;
  }
  const auto& tm = std::get<TimeMap>(dyn);
  const auto* susp = tm.flow->as<Suspension>();
  if (!susp || !susp->base->is_symbolic() || tm.t <= 0.0) return false;
  *k = susp->base->leaf(x.component()).alphabet_size();
  if (susp->roof.depth() > 0) *k = std::max(*k, susp->roof.alphabet());
  return true;
}

std::vector<std::uint64_t> integer_checkpoints(const Schedule& schedule) {
  std::vector<std::uint64_t> out;
  for (double c : schedule.checkpoints) {
    require(c >= 1.0, "map checkpoints must be >= 1");
    out.push_back(static_cast<std::uint64_t>(std::llround(c)));
  }
  return out;
}

AverageTable symbolic_map_averages(const MapDynamics& dyn, const std::vector<Factored>& fs, int k, int D,
                                   const PointGenerator& x, const std::vector<std::uint64_t>& cps, bool use_parallel) {
  AverageTable out;
  out.values.assign(fs.size(), std::vector<double>(cps.size(), 0.0));
  out.bounds.assign(fs.size(), 0.0);
  SymbolicOrbit orbit(dyn, x, static_cast<std::size_t>(D));
  std::vector<double> acc(fs.size(), 0.0);
  std::vector<std::uint32_t> codes;
  std::vector<double> fibers;
  std::uint64_t j = 0;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    while (j < cps[c]) {
      const std::uint64_t end = std::min(cps[c], j + kChunkSteps);
      const std::size_t len = static_cast<std::size_t>(end - j);
      codes.resize(len);
      fibers.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        const auto [m, s] = orbit.next(j + i);
        const Symbol* w = orbit.symbols_at(m);
        std::uint32_t code = 0;
        for (int q = 0; q < D; ++q) code = code * static_cast<std::uint32_t>(k) + w[q];
        codes[i] = code;
        fibers[i] = s;
      }
      auto accumulate = [&](std::size_t o) {
        const auto& f = fs[o];
        double part = 0.0;
        if (f.profile) {
          for (std::size_t i = 0; i < len; ++i) part += f.table[codes[i]] * profile_at(*f.profile, fibers[i]);
        } else {
          for (std::size_t i = 0; i < len; ++i) part += f.table[codes[i]];
        }
        acc[o] += part;
      };
      if (use_parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t o = 0; o < static_cast<std::int64_t>(fs.size()); ++o) accumulate(static_cast<std::size_t>(o));
      } else {
        for (std::size_t o = 0; o < fs.size(); ++o) accumulate(o);
      }
      j = end;
    }
    for (std::size_t o = 0; o < fs.size(); ++o) out.values[o][c] = acc[o] / static_cast<double>(cps[c]);
  }
  return out;
}

// Circle or torus orbit of a rotation, or of a time-t map of a rotation or
// translation flow: x_j = x_0 + j * v mod 1.
std::optional<std::vector<double>> linear_orbit_velocity(const MapDynamics& dyn, const PointGenerator& x) {
  if (x.is_symbolic()) return std::nullopt;
  if (const auto* s = std::get_if<System>(&dyn)) {
    if (const auto* r = s->leaf(x.component()).as<CircleRotation>()) return std::vector<double>{r->theta};
    return std::nullopt;
  }
  const auto& tm = std::get<TimeMap>(dyn);
  if (tm.flow->as<RotationFlow>()) return std::vector<double>{tm.t};
  if (const auto* tt = tm.flow->as<TorusTranslation>()) {
    std::vector<double> v = tt->velocity;
    for (double& c : v) c *= tm.t;
    return v;
  }
  return std::nullopt;
}

AverageTable linear_map_averages(const std::vector<Observable>& obs, const PointGenerator& x,
                                 const std::vector<double>& v, const std::vector<std::uint64_t>& cps,
                                 bool use_parallel) {
  AverageTable out;
  out.values.assign(obs.size(), std::vector<double>(cps.size(), 0.0));
  out.bounds.assign(obs.size(), 0.0);
  const std::size_t dim = v.size();
  require(x.coords().size() == dim, "point dimension does not match the dynamics");
  std::vector<double> acc(obs.size(), 0.0);
  std::vector<double> pos;
  std::uint64_t j = 0;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    while (j < cps[c]) {
      const std::uint64_t end = std::min(cps[c], j + kChunkSteps);
      const std::size_t len = static_cast<std::size_t>(end - j);
      pos.resize(len * dim);
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t a = 0; a < dim; ++a) {
          pos[i * dim + a] = frac(x.coords()[a] + std::fmod(static_cast<double>(j + i) * v[a], 1.0));
        }
      }
      auto accumulate = [&](std::size_t o) {
        double part = 0.0;
        PointView pv;
        for (std::size_t i = 0; i < len; ++i) {
          pv.coords = std::span<const double>(pos).subspan(i * dim, dim);
          pv.circle = pv.coords[0];
          part += obs[o].eval(pv);
        }
        acc[o] += part;
      };
      if (use_parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t o = 0; o < static_cast<std::int64_t>(obs.size()); ++o) accumulate(static_cast<std::size_t>(o));
      } else {
        for (std::size_t o = 0; o < obs.size(); ++o) accumulate(o);
      }
      j = end;
    }
    for (std::size_t o = 0; o < obs.size(); ++o) out.values[o][c] = acc[o] / static_cast<double>(cps[c]);
  }
  return out;
}

AverageTable generic_map_averages(const MapDynamics& dyn, const std::vector<Observable>& obs, const PointGenerator& x,
                                  const std::vector<std::uint64_t>& cps) {
  AverageTable out;
  out.values.assign(obs.size(), std::vector<double>(cps.size(), 0.0));
  out.bounds.assign(obs.size(), 0.0);
  std::vector<double> acc(obs.size(), 0.0);
  PointGenerator p = x;
  std::uint64_t j = 0;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    for (; j < cps[c]; ++j) {
      for (std::size_t o = 0; o < obs.size(); ++o) acc[o] += obs[o].eval(p);
      p = step(dyn, p);
    }
    for (std::size_t o = 0; o < obs.size(); ++o) out.values[o][c] = acc[o] / static_cast<double>(cps[c]);
  }
  return out;
}

}  // namespace

Schedule Schedule::geometric(double first, double last, double ratio, bool integral) {
  require(first > 0.0 && last >= first && ratio > 1.0, "geometric schedule needs 0 < first <= last and ratio > 1");
  Schedule s;
  for (double v = first; v < last; v *= ratio) {
    const double c = integral ? std::ceil(v - 1e-9) : v;
    if (s.checkpoints.empty() || c > s.checkpoints.back()) s.checkpoints.push_back(c);
  }
  const double l = integral ? std::ceil(last - 1e-9) : last;
  if (s.checkpoints.empty() || l > s.checkpoints.back()) s.checkpoints.push_back(l);
  return s;
}

AverageTable map_averages(const MapDynamics& dyn, const std::vector<Observable>& obs, const PointGenerator& x,
                          const Schedule& schedule, bool use_parallel) {
  require(!schedule.checkpoints.empty(), "schedule must be nonempty");
  const auto cps = integer_checkpoints(schedule);
  int k = 0;
  if (symbolic_orbit(dyn, x, &k)) {
    int D = 1;
    for (const auto& o : obs) D = std::max(D, static_cast<int>(o.window()));
    double cells = std::pow(static_cast<double>(k), D);
    if (cells <= static_cast<double>(kTableBudget)) {
      std::vector<Factored> fs;
      bool ok = true;
      for (const auto& o : obs) {
        auto f = factor(o, x.component(), k, D);
        if (!f) {
          ok = false;
          break;
        }
        fs.push_back(std::move(*f));
      }
      if (ok) return symbolic_map_averages(dyn, fs, k, D, x, cps, use_parallel);
    }
  }
  if (auto v = linear_orbit_velocity(dyn, x)) return linear_map_averages(obs, x, *v, cps, use_parallel);
  return generic_map_averages(dyn, obs, x, cps);
}

double birkhoff_average_map(const MapDynamics& dyn, const Observable& phi, const PointGenerator& x, std::uint64_t n) {
  require(n >= 1, "birkhoff average needs n >= 1");
  Schedule s;
  s.checkpoints = {static_cast<double>(n)};
  return map_averages(dyn, {phi}, x, s).values[0][0];
}

AverageTable flow_averages(const Flow& flow, const std::vector<Observable>& obs, const PointGenerator& x,
                           const Schedule& schedule, double step) {
  require(!schedule.checkpoints.empty() && schedule.checkpoints.front() > 0.0, "flow checkpoints must be positive");
  require(step > 0.0, "quadrature step must be positive");
  AverageTable out;
  out.values.assign(obs.size(), std::vector<double>(schedule.size(), 0.0));
  out.bounds.assign(obs.size(), 0.0);
  const auto& cps = schedule.checkpoints;

  if (const auto* s = flow.as<Suspension>()) {
    require(s->base->is_symbolic() && x.is_symbolic(), "flow averages on suspensions need a shift base");
    int k = s->base->leaf(x.component()).alphabet_size();
    if (s->roof.depth() > 0) k = std::max(k, s->roof.alphabet());
    int D = std::max(1, s->roof.depth());
    for (const auto& o : obs) D = std::max(D, static_cast<int>(o.window()));
    std::vector<Factored> fs;
    for (const auto& o : obs) {
      auto f = factor(o, x.component(), k, D);
      if (!f) throw Unsupported("observable " + o.describe() + " cannot be integrated along a suspension orbit");
      fs.push_back(std::move(*f));
    }
    SymbolCursor cursor(x.with_fiber(std::nullopt), static_cast<std::size_t>(D) + 16);
    const auto rd = static_cast<std::size_t>(s->roof.depth());
    std::vector<double> acc(obs.size(), 0.0);
    double tau = 0.0;
    double a = x.fiber().value_or(0.0);
    std::uint64_t m = 0;
    std::size_t c = 0;
    while (c < cps.size()) {
      const Symbol* w = cursor.at(m);
      const double r = s->roof.at(std::span<const Symbol>(w, std::max<std::size_t>(rd, 1)));
      std::uint32_t code = 0;
      for (int q = 0; q < D; ++q) code = code * static_cast<std::uint32_t>(k) + w[q];
      double b = r;
      bool hit = false;
      if (tau + (r - a) >= cps[c]) {
        b = a + (cps[c] - tau);
        hit = true;
      }
      for (std::size_t o = 0; o < fs.size(); ++o) {
        const auto& f = fs[o];
        const double v = f.table[code];
        if (v == 0.0) continue;
        acc[o] += f.profile ? v * profile_integral(*f.profile, a, b) : v * (b - a);
      }
      tau += b - a;
      if (hit) {
        for (std::size_t o = 0; o < fs.size(); ++o) out.values[o][c] = acc[o] / cps[c];
        ++c;
        a = b;
        if (a < r) continue;
      }
      a = 0.0;
      ++m;
    }
    return out;
  }

  std::vector<double> v;
  if (flow.as<RotationFlow>()) {
    v = {1.0};
  } else {
    v = flow.as<TorusTranslation>()->velocity;
  }
  const std::size_t dim = v.size();
  require(!x.is_symbolic() && x.coords().size() == dim, "flow point dimension does not match the flow");
  double speed = 0.0;
  for (double c : v) speed = std::max(speed, std::abs(c));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t oi = 0; oi < static_cast<std::int64_t>(obs.size()); ++oi) {
    const auto o = static_cast<std::size_t>(oi);
    std::vector<double> pos(dim);
    PointView pv;
    auto value_at = [&](double t) {
      for (std::size_t a = 0; a < dim; ++a) pos[a] = frac(x.coords()[a] + std::fmod(t * v[a], 1.0));
      pv.coords = pos;
      pv.circle = pos[0];
      return obs[o].eval(pv);
    };
    double acc = 0.0;
    double t_prev = 0.0;
    double f_prev = value_at(0.0);
    std::uint64_t i = 0;
    for (std::size_t c = 0; c < cps.size(); ++c) {
      while (t_prev < cps[c]) {
        const double grid = static_cast<double>(i + 1) * step;
        const double t = std::min(grid, cps[c]);
        const double f = value_at(t);
        acc += 0.5 * (t - t_prev) * (f_prev + f);
        if (t == grid) ++i;
        t_prev = t;
        f_prev = f;
      }
      out.values[o][c] = acc / cps[c];
    }
    out.bounds[o] = step * step * obs[o].flow_second_derivative() * speed * speed / 12.0;
  }
  return out;
}

FlowAverage birkhoff_average_flow(const Flow& flow, const Observable& phi, const PointGenerator& x, double T,
                                  double step) {
  require(T > 0.0, "flow average needs T > 0");
  Schedule s;
  s.checkpoints = {T};
  const auto t = flow_averages(flow, {phi}, x, s, step);
  return FlowAverage{t.values[0][0], t.bounds[0]};
}

Measure empirical_measure(const MapDynamics& dyn, const PointGenerator& x, std::uint64_t n) {
  require(n >= 1, "empirical measure needs n >= 1");
  std::vector<PointGenerator> pts;
  std::vector<double> counts;
  std::unordered_map<std::string, std::size_t> index;
  constexpr std::size_t kHorizon = 64;
  PointGenerator p = x;
  for (std::uint64_t j = 0; j < n; ++j) {
    std::string key;
    for (auto c : p.component()) key.push_back(static_cast<char>(c));
    key.push_back('|');
    if (p.is_symbolic()) {
      const Word w = p.prefix(kHorizon);
      key.append(w.begin(), w.end());
    }
    auto quantize = [&](double v) {
      const auto q = static_cast<std::int64_t>(std::llround(v * 1e12));
      key.append(reinterpret_cast<const char*>(&q), sizeof q);
    };
    if (p.fiber()) quantize(*p.fiber());
    for (double c : p.coords()) quantize(frac(c));
    auto [it, fresh] = index.emplace(std::move(key), pts.size());
    if (fresh) {
      pts.push_back(p);
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
    p = step(dyn, p);
  }
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = counts[i] / static_cast<double>(n);
  double total = 0.0;
  for (double v : w) total += v;
  w.back() += 1.0 - total;
  return Measure::atomic(std::move(pts), std::move(w));
}

std::vector<Cluster> limit_point_set(const MapDynamics& dyn, const PointGenerator& x, const Schedule& schedule,
                                     const TestFamily& fam, double tol) {
  require(!schedule.checkpoints.empty(), "schedule must be nonempty");
  const AverageTable avg = map_averages(dyn, fam.observables, x, schedule);
  const std::size_t n = schedule.size();
  std::vector<std::vector<double>> vecs(n, std::vector<double>(fam.size()));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t o = 0; o < fam.size(); ++o) vecs[c][o] = avg.values[o][c];
  }
  // single linkage via union-find
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (weak_star_distance(vecs[i], vecs[j], fam) <= tol) parent[find(i)] = find(j);
    }
  }
  std::vector<Cluster> out;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(out.size());
      out.push_back(Cluster{vecs[i], {}});
    }
    out[static_cast<std::size_t>(slot[r])].checkpoints.push_back(schedule.checkpoints[i]);
  }
  return out;
}

std::string to_string(Label l) {
  switch (l) {
    case Label::Generic:
      return "Generic";
    case Label::NotGeneric:
      return "NotGeneric";
    case Label::Irregular:
      return "Irregular";
    case Label::Regular:
      return "Regular";
    case Label::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify_generic(const AverageTable& averages, const std::vector<double>& targets, const TestFamily& fam,
                         const Schedule& schedule, double tol) {
  require(schedule.size() >= 2, "genericity check needs at least two checkpoints");
  require(tol > 0.0, "tolerance must be positive");
  const std::size_t last = schedule.size() - 1;
  Verdict v;
  v.checkpoints_used = schedule.size();
  bool all_close = true;
  double worst = -1.0;
  std::size_t worst_obs = 0;
  for (std::size_t o = 0; o < fam.size(); ++o) {
    const double d1 = std::abs(averages.values[o][last] - targets[o]);
    const double d0 = std::abs(averages.values[o][last - 1] - targets[o]);
    const double drift = std::abs(averages.values[o][last] - averages.values[o][last - 1]);
    if (d1 >= 3 * tol && d0 >= 3 * tol) {
      v.label = Label::NotGeneric;
      v.witness = fam.observables[o].describe();
      v.witness_checkpoint = schedule.checkpoints[last];
      v.gap = d1;
      return v;
    }
    if (!(d1 < tol && d0 < tol && drift < tol / 2)) all_close = false;
    if (d1 > worst) {
      worst = d1;
      worst_obs = o;
    }
  }
  v.gap = std::max(worst, 0.0);
  v.witness = fam.size() ? fam.observables[worst_obs].describe() : "";
  v.witness_checkpoint = schedule.checkpoints[last];
  v.label = all_close ? Label::Generic : Label::Inconclusive;
  return v;
}

Verdict classify_generic(const MapDynamics& dyn, const PointGenerator& x, const Measure& mu, const TestFamily& fam,
                         const Schedule& schedule, double tol) {
  const auto targets = family_integrals(mu, fam);
  return classify_generic(map_averages(dyn, fam.observables, x, schedule), targets, fam, schedule, tol);
}

Verdict classify_generic(const Flow& flow, const PointGenerator& x, const Measure& mu, const TestFamily& fam,
                         const Schedule& schedule, double tol, double step) {
  const auto targets = family_integrals(mu, fam);
  return classify_generic(flow_averages(flow, fam.observables, x, schedule, step), targets, fam, schedule, tol);
}

Verdict classify_irregular(const std::vector<double>& averages, const Observable& phi, const Schedule& schedule,
                           double tol) {
  require(schedule.size() >= 4, "irregularity check needs at least four checkpoints");
  require(averages.size() == schedule.size(), "averages do not match the schedule");
  const std::size_t from = schedule.size() / 2;
  double lo = INFINITY, hi = -INFINITY;
  std::size_t at = from;
  for (std::size_t c = from; c < averages.size(); ++c) {
    lo = std::min(lo, averages[c]);
    if (averages[c] > hi) {
      hi = averages[c];
      at = c;
    }
  }
  Verdict v;
  v.gap = hi - lo;
  v.checkpoints_used = schedule.size() - from;
  v.witness = phi.describe();
  v.witness_checkpoint = schedule.checkpoints[at];
  if (v.gap > 3 * tol) {
    v.label = Label::Irregular;
  } else if (v.gap < tol) {
    v.label = Label::Regular;
  } else {
    v.label = Label::Inconclusive;
  }
  return v;
}

Verdict classify_irregular(const MapDynamics& dyn, const PointGenerator& x, const Observable& phi,
                           const Schedule& schedule, double tol) {
  return classify_irregular(map_averages(dyn, {phi}, x, schedule).values[0], phi, schedule, tol);
}

Verdict classify_irregular(const Flow& flow, const PointGenerator& x, const Observable& phi, const Schedule& schedule,
                           double tol, double step) {
  return classify_irregular(flow_averages(flow, {phi}, x, schedule, step).values[0], phi, schedule, tol);
}

}  // namespace ergode
