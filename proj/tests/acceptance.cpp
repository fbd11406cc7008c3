// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ergode/kernels.hpp"
#include "ergode/suites.hpp"

using namespace ergode;

namespace {

const double kLog2 = std::log(2.0);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

// log of the spectral radius of a 0/1 matrix by power iteration
double log_spectral_radius(const std::vector<std::vector<int>>& A) {
  const std::size_t k = A.size();
  std::vector<double> v(k, 1.0), w(k);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = 0.0;
      for (std::size_t j = 0; j < k; ++j) w[i] += A[i][j] * v[j];
    }
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, x);
    lambda = norm;
    for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / norm;
  }
  return std::log(lambda);
}

double h2(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

double log_binom(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

double log_sum(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// binary words of length n whose count of symbol 0 at each scale lies in its
// window: the counts between consecutive scales are free binomial stages
double stage_convolution_log_count(const std::vector<OscillationWindow>& windows, std::uint64_t n) {
  std::vector<double> f = {0.0};  // f[c]: log #prefixes with c zeros
  std::uint64_t at = 0;
  for (const auto& w : windows) {
    if (w.scale > n) break;
    const std::uint64_t len = w.scale - at;
    std::vector<double> g(w.scale + 1, -INFINITY);
    const auto lo = static_cast<std::int64_t>(std::ceil(w.lo * static_cast<double>(w.scale) - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(w.hi * static_cast<double>(w.scale) + 1e-9));
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (std::isinf(f[c])) continue;
      for (std::uint64_t d = 0; d <= len; ++d) {
        const auto total = static_cast<std::int64_t>(c + d);
        if (total < lo || total > hi) continue;
        g[c + d] = log_sum(g[c + d], f[c] + log_binom(static_cast<double>(len), static_cast<double>(d)));
      }
    }
    f = std::move(g);
    at = w.scale;
  }
  double total = -INFINITY;
  for (double x : f) total = log_sum(total, x);
  return total + static_cast<double>(n - at) * kLog2;
}

// integral of phi(phi^t(x, 0)) against a Bernoulli base by enumerating every
// word that fixes the value
double pulled_back_integral(const Flow& flow, const std::vector<double>& probs, double t, const Observable& phi) {
  const auto& s = *flow.as<Suspension>();
  const int k = static_cast<int>(probs.size());
  const int L = static_cast<int>(std::ceil(t / s.roof.min())) + 1 + s.roof.depth() + static_cast<int>(phi.window());
  std::uint64_t cells = 1;
  for (int i = 0; i < L; ++i) cells *= static_cast<std::uint64_t>(k);
  double total = 0.0;
  Word w(static_cast<std::size_t>(L));
  for (std::uint64_t code = 0; code < cells; ++code) {
    kernels::decode_word(code, k, w);
    double m = 1.0;
    for (auto a : w) m *= probs[a];
    total += m * phi.eval(time_t_map(flow, t, PointGenerator::explicit_word(w).with_fiber(0.0)));
  }
  return total;
}

bool in_bowen_ball(const PointGenerator& x, const PointGenerator& y, std::uint64_t n, double eps) {
  const MetricSpec m = MetricSpec::of(System::full_shift(2));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (distance(m, x.shifted(i), y.shifted(i), 64).value >= eps) return false;
  }
  return true;
}

Flow suspension(double roof) { return Flow::suspension(System::full_shift(2), RoofFunction::constant(roof)); }

void entropy_recovery(Outcome& o) {
  struct Case {
    const char* name;
    System sys;
    double truth, tol;
  };
  const Case cases[] = {
      {"FS2", System::full_shift(2), log_spectral_radius({{1, 1}, {1, 1}}), 0.02},
      {"FS3", System::full_shift(3), log_spectral_radius({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), 0.03},
      {"golden", System::golden_mean(), log_spectral_radius({{1, 1}, {1, 0}}), 0.03},
  };
  for (const auto& c : cases) {
    const double sp = spanning_entropy(c.sys, SubsetSpec::whole_space(), {8, 12, 16}, {0.25, 0.125}).value;
    const double bw = bowen_entropy_symbolic(c.sys, SubsetSpec::whole_space(), {200, 400, 800}).value;
    o.detail << " " << c.name << " spanning=" << sp << " bowen=" << bw << " (oracle " << c.truth << ")";
    o.check(std::abs(sp - c.truth) <= c.tol, std::string(c.name) + " spanning");
    o.check(std::abs(bw - c.truth) <= c.tol, std::string(c.name) + " bowen");
  }
  const System rot = System::circle_rotation(std::sqrt(2.0) - 1);
  const double sp = spanning_entropy(rot, SubsetSpec::whole_space(), {4, 8, 16}, {0.125}).value;
  const double bw = bowen_entropy_metric(rot, {64, 256, 1024}).value;
  o.detail << " rotation spanning=" << sp << " bowen=" << bw;
  o.check(sp <= 0.05 && bw <= 0.05, "rotation");
}

void time_change(Outcome& o) {
  for (double roof : {1.0, 2.0}) {
    for (bool window : {false, true}) {
      const SubsetSpec Y = window ? SubsetSpec::frequency_window(0, 0.28, 0.32) : SubsetSpec::whole_space();
      const AbramovTable t = verify_thm_a(suspension(roof), Y);
      o.detail << " r=" << roof << (window ? " FW" : " X") << ": pairwise=" << t.max_pairwise << " direct-mean=" << t.direct_gap;
      o.check(t.flow.reductions.size() == 3, "three reductions");
      o.check(t.max_pairwise <= 0.05 && t.direct_gap <= 0.05, "agreement");
    }
  }
}

void ergodic_equality(Outcome& o) {
  for (double p : {0.1, 0.3, 0.5}) {
    const ErgodicCase e = verify_ergodic_equality(p, 100000);
    o.detail << " p=" << p << ": " << e.generic_set.value << " vs " << h2(p);
    o.check(std::abs(e.h_mu.value - h2(p)) <= 1e-12, "closed-form metric entropy");
    o.check(std::abs(e.generic_set.value - h2(p)) <= 0.02, "generic-set entropy");
  }
}

void strict_case(Outcome& o) {
  const StrictCase s = verify_strict_case(100, 100000, 2024);
  o.detail << " NotGeneric " << s.not_generic << "/" << s.sampled << ", generic-set entropy " << s.generic_set.value
           << (s.generic_set.empty_cover ? " (empty)" : "") << ", h_mu " << s.h_mu.value;
  o.check(s.not_generic == 100, "all samples NotGeneric");
  o.check(s.generic_set.value == 0.0, "generic-set entropy 0");
  o.check(std::abs(s.h_mu.value - kLog2) <= 1e-9, "h_mu = log 2");
}

void inclusions(Outcome& o) {
  for (double roof : {1.0, 2.0}) {
    const InclusionSuite s = verify_inclusions(suspension(roof), 17, 200000, 31);
    o.detail << " r=" << roof << ": " << s.rows.size() << " points, violations " << s.generic_violations << "/"
             << s.irregular_violations << ", map Generic " << s.count(&InclusionRow::generic_map, Label::Generic)
             << " Irregular " << s.count(&InclusionRow::irregular_map, Label::Irregular);
    o.check(s.rows.size() >= 50, "at least 50 points");
    o.check(s.generic_violations == 0 && s.irregular_violations == 0, "no violations");
  }
}

void rotation_example(Outcome& o) {
  const Flow flow = Flow::rotation();
  const Measure leb = Measure::lebesgue();
  const TestFamily fam = TestFamily::for_flow(flow);
  const MapDynamics half = time_map(flow, 0.5);
  int generic = 0, not_generic = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto x = PointGenerator::coordinate({counter_uniform(77, i)});
    generic += classify_generic(flow, x, leb, fam, Schedule::flow_default(), 0.02).label == Label::Generic;
    const Verdict v = classify_generic(half, x, leb, fam, Schedule::map_default(), 0.02);
    not_generic += v.label == Label::NotGeneric && v.witness.find("q=2") != std::string::npos;
  }
  o.detail << " flow Generic " << generic << "/20, time-1/2 NotGeneric(q=2) " << not_generic << "/20";
  o.check(generic == 20 && not_generic == 20, "all 20 points");
}

void irregular_desk_scale(Outcome& o) {
  const IrregularCase r = verify_irregular(0.3, 0.7, 4.0, 1000000, 2000);
  const double oracle = stage_convolution_log_count(r.windows.as<OscillationWindows>()->windows, 2000) / 2000;
  o.detail << " label " << to_string(r.verdict.label) << " gap " << r.verdict.gap << ", entropy " << r.entropy.value << " = "
           << r.entropy.value / kLog2 << " log 2 (oracle " << oracle << ")";
  o.check(r.verdict.label == Label::Irregular && r.verdict.gap >= 0.18, "irregular with gap >= 0.18");
  o.check(r.entropy.value >= 0.95 * kLog2, "entropy >= 0.95 log 2");
  o.check(std::abs(r.entropy.value - oracle) <= 2e-3, "closed-form count");
}

void mistake_machinery(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const System fs2 = System::full_shift(2);
  int agree = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 24);
    const double eps = std::ldexp(1.0, -static_cast<int>(u(rng) * 5)) * (0.55 + 0.45 * u(rng));
    Word a(n + 8);
    for (auto& s : a) s = u(rng) < 0.5;
    Word b = a;
    for (int f = static_cast<int>(u(rng) * 3); f > 0; --f) {
      auto& s = b[static_cast<std::size_t>(u(rng) * static_cast<double>(b.size()))];
      s = static_cast<Symbol>(1 - s);
    }
    const auto x = PointGenerator::explicit_word(a), y = PointGenerator::explicit_word(b);
    agree += mistake_ball_membership(fs2, x, y, n, MistakeFunction::zero(), eps).member == in_bowen_ball(x, y, n, eps);
  }
  o.detail << " g=0 agreement " << agree << "/10000";
  o.check(agree == 10000, "g = 0 equals Bowen balls");

  std::vector<OrbitSpecSegment> full;
  for (std::uint64_t j = 0; j < 6; ++j) full.push_back({PointGenerator::seeded_iid(j, {0.5, 0.5}), 100.0 * (j + 1), 1.0});
  const GlueResult rf = glue_orbits(fs2, full, MistakeFunction::zero());
  bool full_ok = true;
  for (const auto& c : rf.checks) full_ok = full_ok && c.member && c.density == 0.0;
  const System gm = System::golden_mean();
  std::vector<OrbitSpecSegment> golden;
  for (std::uint64_t j = 0; j < 6; ++j) {
    golden.push_back({generic_point(Measure::markov({{0.5, 0.5}, {1.0, 0.0}}), GenericMode::SeededIid, 4000, j).point, 150.0 * (j + 1), 1.0});
  }
  const GlueResult rg = glue_orbits(gm, golden, MistakeFunction::power_law(0.5, {{0.1, 1.0}}, 1.0));
  bool golden_ok = true;
  double worst = 0.0;
  for (std::size_t j = 0; j < golden.size(); ++j) {
    golden_ok = golden_ok && rg.checks[j].member && rg.checks[j].density <= 1.0 / golden[j].duration + 1e-12;
    worst = std::max(worst, rg.checks[j].density * golden[j].duration);
  }
  o.detail << ", full shift densities 0: " << (full_ok ? "yes" : "no") << ", golden mean max density*t_j " << worst;
  o.check(full_ok, "full-shift gluing");
  o.check(golden_ok, "golden-mean gluing");
}

void hygiene(Outcome& o) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> probs{0.3, 0.7};
  const Measure bern = Measure::bernoulli(probs);
  const Flow flows[] = {suspension(1.0), suspension(2.0),
                        Flow::suspension(System::full_shift(2), RoofFunction::cylinder(1, 2, {0.75, 1.5}))};
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const double t = 3.0 * u(rng);
    Word w;
    for (int i = 0; i < 1 + trial % 3; ++i) w.push_back(static_cast<Symbol>(rng() & 1));
    const double a = u(rng);
    const auto phi = Observable::fiber_profile(Observable::cylinder(w), {{0.0, a}, {0.6, 1.0 - a}, {2.0, 0.3}});
    const Flow& f = flows[trial % 3];
    worst = std::max(worst, std::abs(integrate(pushforward(f, t, bern), phi) - pulled_back_integral(f, probs, t, phi)));
  }
  // rotation flow: Dirac masses move exactly, Lebesgue is invariant
  const Flow rot = Flow::rotation();
  for (int trial = 0; trial < 20; ++trial) {
    const double x = u(rng), t = 5 * u(rng);
    const auto phi = Observable::harmonic(1 + trial % 4, trial % 2 == 1);
    const auto p = PointGenerator::coordinate({x});
    worst = std::max(worst, std::abs(integrate(pushforward(rot, t, Measure::dirac(p)), phi) - phi.eval(time_t_map(rot, t, p))));
    worst = std::max(worst, std::abs(integrate(pushforward(rot, t, Measure::lebesgue()), phi)));
  }
  o.detail << " change of variables max error " << worst;
  o.check(worst <= 1e-9, "change of variables");

  int monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CoverElement> cover;
    const int size = 1 + static_cast<int>(u(rng) * 40);
    for (int i = 0; i < size; ++i) {
      const double N = u(rng) < 0.1 ? INFINITY : u(rng) * 25;
      cover.push_back({CylinderBody{}, N, std::isinf(N) ? 0.0 : std::exp(-N)});
    }
    bool ok = true;
    double prev = INFINITY;
    for (double al = 0.02; al < 4.0; al += 0.02) {
      const double s = caratheodory_sum(cover, al);
      ok = ok && s <= prev;
      prev = s;
    }
    monotone += ok;
  }
  o.detail << ", monotone covers " << monotone << "/100";
  o.check(monotone == 100, "monotone sums");

  bool nonincreasing = true;
  for (double p : {0.1, 0.3, 0.5}) {
    double prev = INFINITY;
    for (int d = 1; d <= 12; ++d) {
      const double v = partition_entropy_estimate(Measure::bernoulli({p, 1 - p}), System::full_shift(2), d).value;
      nonincreasing = nonincreasing && v <= prev + 1e-12;
      prev = v;
    }
  }
  o.detail << ", partition estimates nonincreasing: " << (nonincreasing ? "yes" : "no");
  o.check(nonincreasing, "partition monotonicity");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"topological entropy recovery", entropy_recovery},
      {"flow entropy equals time-t entropy over t", time_change},
      {"ergodic measures: generic-set entropy equals h_mu", ergodic_equality},
      {"non-ergodic mixture: empty generic set", strict_case},
      {"generic and irregular inclusions map to flow", inclusions},
      {"rotation flow vs rational time map", rotation_example},
      {"irregular point and oscillation-window entropy", irregular_desk_scale},
      {"mistake balls and orbit gluing", mistake_machinery},
      {"numerical hygiene", hygiene},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    o.detail.precision(4);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s:%s (%.1fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
