#include "ergode/suites.hpp"

#include <algorithm>
#include <cmath>

#include "ergode/errors.hpp"

namespace ergode {

AbramovTable verify_thm_a(const Flow& flow, const SubsetSpec& Y, const FlowEntropyParams& params) {
  require(!params.times.empty(), "verify_thm_a needs at least one time");
  AbramovTable out;
  out.flow = bowen_entropy_flow(flow, Y, params);
  const auto& red = out.flow.reductions;
  for (const auto& r : red) out.mean_reduction += r.h_over_t / static_cast<double>(red.size());
  for (const auto& a : red) {
    for (const auto& b : red) out.max_pairwise = std::max(out.max_pairwise, std::abs(a.h_over_t - b.h_over_t));
  }
  out.direct_gap = std::abs(out.flow.value - out.mean_reduction);
  return out;
}

ErgodicCase verify_ergodic_equality(double p, std::uint64_t depth) {
  require(p > 0.0 && p < 1.0, "ergodic case needs 0 < p < 1");
  require(depth >= 1, "ergodic case needs depth >= 1");
  ErgodicCase out;
  out.p = p;
  out.depth = depth;
  out.delta = 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(depth));
  const System fs2 = System::full_shift(2);
  out.h_mu = metric_entropy(Measure::bernoulli({p, 1 - p}), fs2);
  out.generic_set = bowen_entropy_symbolic(
      fs2, SubsetSpec::frequency_window(0, std::max(0.0, p - out.delta), std::min(1.0, p + out.delta)), {depth});
  return out;
}

StrictCase verify_strict_case(std::size_t samples, std::uint64_t horizon, std::uint64_t seed, double tol) {
  const Counterexample ce = build_counterexample_system();
  StrictCase out;
  out.sampled = samples;
  out.h_mu = metric_entropy(ce.mu, ce.system);
  const TestFamily fam = TestFamily::for_system(ce.system, 3);
  const Schedule sched = Schedule::geometric(1000, static_cast<double>(horizon), 2.0, true);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint8_t c = counter_uniform(seed, 2 * i) < 0.5 ? 0 : 1;
    const auto x = PointGenerator::seeded_iid(seed + i, {0.5, 0.5}).with_component({c});
    out.verdicts.push_back(classify_generic(MapDynamics(ce.system), x, ce.mu, fam, sched, tol));
    out.not_generic += out.verdicts.back().label == Label::NotGeneric;
  }
  out.generic_set = bowen_entropy_symbolic(ce.system, SubsetSpec::component_window(0, 0.5 - 0.02, 0.5 + 0.02),
                                           {100, static_cast<std::uint64_t>(std::min<double>(horizon, 1e4))});
  return out;
}

IrregularCase verify_irregular(double lo, double hi, double ratio, std::uint64_t horizon, std::uint64_t depth,
                               double eta, double tol) {
  const System fs2 = System::full_shift(2);
  const Observable freq0 = Observable::symbol_frequency(0);
  const PointGenerator x = irregular_point(fs2, freq0, lo, hi, ratio, horizon);
  const Schedule sched = Schedule::geometric(1000, static_cast<double>(horizon), 1.1, true);
  const Verdict v = classify_irregular(MapDynamics(fs2), x, freq0, sched, tol);
  SubsetSpec Y = oscillation_windows_for(x, 0, eta, depth);
  EntropyEstimate e = bowen_entropy_symbolic(fs2, Y, {depth});
  return {x, v, std::move(Y), std::move(e)};
}

std::size_t InclusionSuite::count(Label InclusionRow::*field, Label l) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const InclusionRow& r) { return r.*field == l; }));
}

InclusionSuite verify_inclusions(const Flow& flow, std::size_t per_kind, std::uint64_t horizon, std::uint64_t seed,
                                 double tol) {
  const auto* s = flow.as<Suspension>();
  require(s != nullptr && s->roof.is_constant(), "inclusion suite needs a constant-roof suspension");
  require(s->base->as<FullShift>() && s->base->alphabet_size() == 2, "inclusion suite needs the full 2-shift base");
  const double r = s->roof.min();
  require(r == std::round(r) && r >= 1.0, "inclusion suite needs an integer roof");
  require(per_kind >= 1 && horizon >= 4000, "inclusion suite needs points and horizon >= 4000");

  const MapDynamics one = time_map(flow, 1.0);
  const TestFamily fam = TestFamily::for_flow(flow, 3, 1);
  const Observable freq0 = Observable::symbol_frequency(0);
  const auto H = static_cast<double>(horizon);
  const Schedule map_sched = Schedule::geometric(1000, H, 1.25, true);

  // phi^1-invariant lift of a base measure: the r time-translates of its zero-section lift
  auto lift = [&](const Measure& base) {
    std::vector<std::pair<Measure, double>> parts;
    for (int j = 0; j < static_cast<int>(r); ++j) parts.emplace_back(pushforward(flow, j, base), 1.0 / r);
    return parts.size() == 1 ? parts[0].first : Measure::mixture(parts);
  };

  InclusionSuite out;
  auto judge = [&](const std::string& kind, const PointGenerator& x, const Measure& base) {
    const Measure nu = lift(base);
    const Measure nu_bar = time_average_measure(flow, nu);
    InclusionRow row;
    row.kind = kind;
    row.generic_map = classify_generic(one, x, nu, fam, map_sched, tol).label;
    row.generic_flow = classify_generic(flow, x, nu_bar, fam, map_sched, tol).label;
    row.irregular_map = classify_irregular(one, x, freq0, map_sched, tol).label;
    row.irregular_flow = classify_irregular(flow, x, freq0, map_sched, tol).label;
    out.generic_violations += row.generic_map == Label::Generic && row.generic_flow == Label::NotGeneric;
    out.irregular_violations += row.irregular_map == Label::Irregular && row.irregular_flow == Label::Regular;
    out.rows.push_back(row);
  };

  const System& base = *s->base;
  for (std::size_t i = 0; i < per_kind; ++i) {
    const double p = 0.2 + 0.6 * counter_uniform(seed, 3 * i);
    const Measure b = Measure::bernoulli({p, 1 - p});
    judge("generic", generic_point(b, GenericMode::DeterministicBlocks, horizon, seed + i).point.with_fiber(0.0), b);
    const double lo = 0.1 + 0.3 * counter_uniform(seed, 3 * i + 1);
    const double hi = 0.6 + 0.3 * counter_uniform(seed, 3 * i + 2);
    judge("irregular", irregular_point(base, freq0, lo, hi, 4.0, horizon).with_fiber(0.0), Measure::bernoulli({0.5, 0.5}));
    judge("random", PointGenerator::seeded_iid(seed + 1000 + i, {0.5, 0.5}).with_fiber(0.0), Measure::bernoulli({0.5, 0.5}));
  }
  return out;
}

}  // namespace ergode
