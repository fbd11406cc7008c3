#include "ergode/runner.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ergode/errors.hpp"
#include "ergode/suites.hpp"

namespace ergode {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::vector<std::uint64_t> as_counts(const std::vector<double>& v) {
  std::vector<std::uint64_t> out;
  for (double x : v) out.push_back(static_cast<std::uint64_t>(x));
  return out;
}

std::string flags(const EntropyEstimate& e) {
  std::string f;
  if (e.empty_cover) f += ";empty_cover=1";
  if (e.upper_bound_only) f += ";upper_bound_only=1";
  if (e.inconclusive) f += ";inconclusive=1";
  return f;
}

Json trace_json(const EntropyEstimate& e) {
  Json tr = Json::array();
  for (const auto& t : e.trace) {
    Json steps = Json::array();
    for (const auto& b : t.bisection) steps.push_back({b.lo, b.hi});
    tr.push_back({{"n", t.n}, {"log_cover_size", t.log_cover_size}, {"alpha_closed", t.alpha_closed}, {"alpha", t.alpha},
                  {"bisection", steps}});
  }
  Json red = Json::array();
  for (const auto& r : e.reductions) red.push_back({{"t", r.t}, {"h", r.h}, {"h_over_t", r.h_over_t}});
  return {{"method", e.method}, {"params", e.params}, {"value", e.value}, {"lower", e.lower}, {"upper", e.upper},
          {"note", e.note}, {"trace", tr}, {"reductions", red}};
}

void add_estimate(Report& rep, const std::string& id, const std::string& quantity, const EntropyEstimate& e,
                  const std::string& extra = {}) {
  rep.add(id, quantity, e.value, e.lower, e.upper, extra + "method=" + e.method + ";" + e.params + flags(e));
  Json d = trace_json(e);
  d["experiment_id"] = id;
  d["quantity"] = quantity;
  d["context"] = extra;
  rep.diagnostics()["estimates"].push_back(std::move(d));
}

FlowEntropyParams flow_params(const ExperimentConfig& c) {
  FlowEntropyParams p;
  p.depths = as_counts(c.param_list("depths", {200, 400, 800, 1600}));
  p.times = c.param_list("times", {0.5, 1.0, 2.0});
  p.alpha_tol = c.param("alpha_tol", 1e-3);
  p.fiber_cells = static_cast<int>(c.param("fiber_cells", 2));
  return p;
}

SubsetSpec subset_of(const ExperimentConfig& c) { return c.subset ? *c.subset : SubsetSpec::whole_space(); }

void run_entropy(const ExperimentConfig& c, Report& rep) {
  const SubsetSpec Y = subset_of(c);
  const auto eps = c.param_list("eps", {0.25, 0.125});
  if (c.flow) {
    const auto e = bowen_entropy_flow(*c.flow, Y, flow_params(c));
    add_estimate(rep, c.id, "bowen", e);
    for (const auto& r : e.reductions) {
      const double tol = c.param("alpha_tol", 1e-3) / r.t;
      rep.add(c.id, "h_over_t", r.h_over_t, r.h_over_t - tol, r.h_over_t + tol, "t=" + num(r.t) + ";h=" + num(r.h));
    }
    add_estimate(rep, c.id, "spanning", spanning_entropy(*c.flow, Y, c.param_list("T", {400, 800}), eps));
    return;
  }
  const System& sys = *c.system;
  if (sys.is_circle()) {
    require(Y.as<WholeSpace>() != nullptr, "circle entropy runs on the whole space");
    const auto arcs = c.param_list("arcs", {64, 256, 1024});
    add_estimate(rep, c.id, "bowen",
                 bowen_entropy_metric(sys, std::vector<int>(arcs.begin(), arcs.end()), static_cast<int>(c.param("grid", 16)),
                                      c.param("alpha_tol", 1e-3)));
    add_estimate(rep, c.id, "spanning", spanning_entropy(sys, Y, as_counts(c.param_list("n", {4, 6, 8})), eps));
    return;
  }
  add_estimate(rep, c.id, "bowen",
               bowen_entropy_symbolic(sys, Y, as_counts(c.param_list("depths", {200, 400, 800})), c.param("alpha_tol", 1e-3)));
  add_estimate(rep, c.id, "spanning", spanning_entropy(sys, Y, as_counts(c.param_list("n", {8, 12, 16})), eps));
}

// map dynamics for the config: the system, or the time-t map of the flow
std::optional<MapDynamics> map_of(const ExperimentConfig& c) {
  if (c.system) return MapDynamics(*c.system);
  if (c.params.count("t")) return MapDynamics(time_map(*c.flow, c.param("t", 1.0)));
  return std::nullopt;
}

void run_birkhoff(const ExperimentConfig& c, Report& rep) {
  const auto dyn = map_of(c);
  const Schedule sched = c.schedule ? *c.schedule : dyn ? Schedule::map_default() : Schedule::flow_default();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const AverageTable t = dyn ? map_averages(*dyn, c.observables, c.points[i], sched)
                               : flow_averages(*c.flow, c.observables, c.points[i], sched, c.param("step", 0.01));
    for (std::size_t k = 0; k < c.observables.size(); ++k) {
      const double b = t.bounds.empty() ? 0.0 : t.bounds[k];
      for (std::size_t j = 0; j < sched.size(); ++j) {
        const double v = t.values[k][j];
        rep.add(c.id + "/point" + std::to_string(i), "average", v, v - b, v + b,
                "observable=" + c.observables[k].describe() + ";n=" + num(sched.checkpoints[j]));
      }
    }
  }
}

std::string verdict_params(const Verdict& v) {
  return "label=" + to_string(v.label) + ";witness=" + v.witness + ";witness_checkpoint=" + num(v.witness_checkpoint) +
         ";checkpoints_used=" + std::to_string(v.checkpoints_used);
}

void run_classify(const ExperimentConfig& c, Report& rep) {
  const auto dyn = map_of(c);
  const Schedule sched = c.schedule ? *c.schedule : dyn ? Schedule::map_default() : Schedule::flow_default();
  const double tol = c.param("tol", 0.02);
  const int depth = static_cast<int>(c.param("depth", 6));
  const int harmonics = static_cast<int>(c.param("harmonics", 8));
  const TestFamily fam = c.system ? TestFamily::for_system(*c.system, depth, harmonics) : TestFamily::for_flow(*c.flow, depth, harmonics);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const std::string id = c.id + "/point" + std::to_string(i);
    for (const auto& mu : c.measures) {
      const Verdict v = dyn ? classify_generic(*dyn, c.points[i], mu, fam, sched, tol)
                            : classify_generic(*c.flow, c.points[i], mu, fam, sched, tol, c.param("step", 0.01));
      rep.add_exact(id, "generic", v.gap, verdict_params(v) + ";target=" + mu.describe());
    }
    for (const auto& phi : c.observables) {
      const Verdict v = dyn ? classify_irregular(*dyn, c.points[i], phi, sched, tol)
                            : classify_irregular(*c.flow, c.points[i], phi, sched, tol, c.param("step", 0.01));
      rep.add_exact(id, "irregular", v.gap, verdict_params(v) + ";observable=" + phi.describe());
    }
  }
}

std::string word_text(const Word& w) {
  std::string s;
  for (Symbol a : w) s += (a < 10 ? std::to_string(a) : "(" + std::to_string(a) + ")");
  return s;
}

void emit_points(const ExperimentConfig& c, Report& rep, const PointGenerator& x, bool probabilistic) {
  const auto n = static_cast<std::size_t>(c.param("emit", 1000));
  Json body = {{"construction", c.raw.at("construction")}, {"probabilistic", probabilistic}, {"prefix", x.prefix(n)}};
  if (!x.component().empty()) body["component"] = x.component();
  rep.attach("points.json", body.dump() + "\n");
}

void run_construct(const ExperimentConfig& c, Report& rep) {
  const ConstructionSpec& s = *c.construction;
  if (s.kind == "generic") {
    const GenericPoint g = generic_point(*s.measure, s.mode, s.horizon, c.seed);
    if (c.system) check_point(*c.system, g.point);
    const Word w = g.point.prefix(s.horizon + 1);
    Symbol top = 0;
    for (Symbol a : w) top = std::max(top, a);
    for (std::size_t L = 1; L <= 2; ++L) {
      std::vector<double> freq(static_cast<std::size_t>(std::pow(top + 1, L)), 0.0);
      for (std::size_t i = 0; i + L <= s.horizon; ++i) {
        std::size_t code = 0;
        for (std::size_t k = 0; k < L; ++k) code = code * (top + 1u) + w[i + k];
        freq[code] += 1.0 / static_cast<double>(s.horizon + 1 - L);
      }
      for (std::size_t code = 0; code < freq.size(); ++code) {
        Word u(L);
        for (std::size_t k = L, r = code; k-- > 0; r /= (top + 1u)) u[k] = static_cast<Symbol>(r % (top + 1u));
        rep.add_exact(c.id, "frequency", freq[code],
                      "word=" + word_text(u) + ";n=" + std::to_string(s.horizon) + ";mass=" + num(cylinder_mass(*s.measure, u, g.point.component())));
      }
    }
    emit_points(c, rep, g.point, g.probabilistic);
    return;
  }
  const System& sys = *c.system;
  if (s.kind == "irregular") {
    const PointGenerator x = irregular_point(sys, *s.observable, s.lo, s.hi, s.ratio, s.horizon, s.first_block);
    const Schedule sched = Schedule::geometric(std::min<double>(1000, s.horizon), static_cast<double>(s.horizon), 1.1, true);
    const AverageTable t = map_averages(MapDynamics(sys), {*s.observable}, x, sched);
    for (std::size_t j = 0; j < sched.size(); ++j) {
      rep.add_exact(c.id, "average", t.values[0][j], "observable=" + s.observable->describe() + ";n=" + num(sched.checkpoints[j]));
    }
    const Verdict v = classify_irregular(t.values[0], *s.observable, sched, 0.02);
    rep.add_exact(c.id, "irregular", v.gap, verdict_params(v));
    emit_points(c, rep, x, false);
    return;
  }
  const GlueResult r = glue_orbits(sys, s.segments, *s.mistake, s.max_connector);
  for (std::size_t j = 0; j < s.segments.size(); ++j) {
    const Membership& m = r.checks[j];
    rep.add_exact(c.id, "segment_density", m.density,
                  "segment=" + std::to_string(j) + ";start=" + std::to_string(r.starts[j]) + ";connector=" +
                      std::to_string(r.connector_lengths[j]) + ";member=" + (m.member ? "1" : "0") +
                      ";mistakes=" + num(m.mistakes) + ";budget=" + num(m.budget));
  }
  for (std::size_t j = 0; j < s.segments.size(); ++j) {
    rep.add_exact(c.id, "declared_T_g", declared_T_g(sys, *s.mistake, s.segments[j].eps),
                  "segment=" + std::to_string(j) + ";eps=" + num(s.segments[j].eps) + ";g=" + s.mistake->describe());
  }
  emit_points(c, rep, r.point, false);
}

void run_thm_a(const ExperimentConfig& c, Report& rep) {
  const FlowEntropyParams p = flow_params(c);
  const AbramovTable t = verify_thm_a(*c.flow, subset_of(c), p);
  Json d = trace_json(t.flow);
  d["experiment_id"] = c.id;
  d["quantity"] = "direct";
  rep.diagnostics()["estimates"].push_back(std::move(d));
  const std::string shared = ";direct=" + num(t.flow.value) + ";direct_lower=" + num(t.flow.lower) +
                             ";direct_upper=" + num(t.flow.upper) + ";mean=" + num(t.mean_reduction) +
                             ";max_pairwise_deviation=" + num(t.max_pairwise) + ";direct_gap=" + num(t.direct_gap);
  for (const auto& r : t.flow.reductions) {
    const double tol = p.alpha_tol / r.t;
    rep.add(c.id, "h_over_t", r.h_over_t, r.h_over_t - tol, r.h_over_t + tol, "t=" + num(r.t) + ";h=" + num(r.h) + shared);
  }
}

void run_thm_b(const ExperimentConfig& c, Report& rep) {
  const auto depth = static_cast<std::uint64_t>(c.param("depth", 100000));
  for (double p : c.param_list("p", {0.1, 0.3, 0.5})) {
    const ErgodicCase e = verify_ergodic_equality(p, depth);
    const std::string params = "p=" + num(p) + ";depth=" + std::to_string(depth) + ";delta=" + num(e.delta);
    rep.add(c.id + "/ergodic", "metric_entropy", e.h_mu.value, e.h_mu.lower, e.h_mu.upper, params);
    add_estimate(rep, c.id + "/ergodic", "generic_set_entropy", e.generic_set, params + ";");
    rep.add_exact(c.id + "/ergodic", "difference", std::abs(e.generic_set.value - e.h_mu.value), params);
  }
  const auto samples = static_cast<std::size_t>(c.param("samples", 100));
  const StrictCase s = verify_strict_case(samples, static_cast<std::uint64_t>(c.param("horizon", 100000)), c.seed, c.param("tol", 0.02));
  rep.add(c.id + "/strict", "metric_entropy", s.h_mu.value, s.h_mu.lower, s.h_mu.upper);
  add_estimate(rep, c.id + "/strict", "generic_set_entropy", s.generic_set);
  rep.add_exact(c.id + "/strict", "not_generic_fraction", static_cast<double>(s.not_generic) / static_cast<double>(samples),
                "sampled=" + std::to_string(samples) + ";not_generic=" + std::to_string(s.not_generic));
}

void run_irregular(const ExperimentConfig& c, Report& rep) {
  const IrregularCase r = verify_irregular(c.param("lo", 0.3), c.param("hi", 0.7), c.param("ratio", 4.0),
                                           static_cast<std::uint64_t>(c.param("horizon", 1000000)),
                                           static_cast<std::uint64_t>(c.param("depth", 2000)), c.param("eta", 0.02),
                                           c.param("tol", 0.02));
  rep.add_exact(c.id, "gap", r.verdict.gap, verdict_params(r.verdict));
  add_estimate(rep, c.id, "oscillation_entropy", r.entropy);
  rep.add_exact(c.id, "ratio_to_log2", r.entropy.value / std::log(2.0), "windows=" + r.windows.describe());
}

void run_inclusions(const ExperimentConfig& c, Report& rep) {
  const InclusionSuite s = verify_inclusions(*c.flow, static_cast<std::size_t>(c.param("per_kind", 17)),
                                             static_cast<std::uint64_t>(c.param("horizon", 200000)), c.seed, c.param("tol", 0.02));
  rep.add_exact(c.id, "points", static_cast<double>(s.rows.size()));
  rep.add_exact(c.id, "generic_violations", static_cast<double>(s.generic_violations), "rule=generic_map_implies_not_notgeneric_flow");
  rep.add_exact(c.id, "irregular_violations", static_cast<double>(s.irregular_violations), "rule=irregular_map_implies_not_regular_flow");
  const std::pair<const char*, Label InclusionRow::*> fields[] = {{"generic_map", &InclusionRow::generic_map},
                                                                  {"generic_flow", &InclusionRow::generic_flow},
                                                                  {"irregular_map", &InclusionRow::irregular_map},
                                                                  {"irregular_flow", &InclusionRow::irregular_flow}};
  for (const auto& [name, f] : fields) {
    for (Label l : {Label::Generic, Label::NotGeneric, Label::Irregular, Label::Regular, Label::Inconclusive}) {
      const std::size_t n = s.count(f, l);
      if (n) rep.add_exact(c.id, std::string(name) + "_count", static_cast<double>(n), "label=" + to_string(l));
    }
  }
}

}  // namespace

void execute(const ExperimentConfig& c, Report& rep) {
  if (c.command == "entropy") return run_entropy(c, rep);
  if (c.command == "birkhoff") return run_birkhoff(c, rep);
  if (c.command == "classify") return run_classify(c, rep);
  if (c.command == "construct") return run_construct(c, rep);
  if (c.command == "verify-thm-a") return run_thm_a(c, rep);
  if (c.command == "verify-thm-b") return run_thm_b(c, rep);
  if (c.command == "verify-irregular") return run_irregular(c, rep);
  if (c.command == "verify-inclusions") return run_inclusions(c, rep);
  throw ValidationError("unknown command '" + c.command + "'");
}

std::uint64_t parse_seed(const std::string& text) {
  require(!text.empty() && text.size() <= 19 && text.find_first_not_of("0123456789") == std::string::npos,
          "seed must be a nonnegative decimal integer, got '" + text + "'");
  return std::stoull(text);
}

int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
  ExperimentConfig config;
  try {
    std::ifstream in(config_path, std::ios::binary);
    require(static_cast<bool>(in), "cannot read config " + config_path.string());
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    config = parse_config(j, options.seed_override);
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const BudgetExceeded& e) {
    log << "budget exhausted while validating: " << e.what() << '\n';
    return kExitBudget;
  }

  const std::filesystem::path out = options.out_dir ? *options.out_dir : std::filesystem::path(config.output.empty() ? "." : config.output);
  Report report(config.seed, config_hash(config.raw));
  int code = kExitOk;
  try {
    execute(config, report);
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    report.mark_incomplete(e.what());
    code = kExitValidation;
  } catch (const BudgetExceeded& e) {
    log << "budget exhausted: " << e.what() << '\n';
    report.mark_incomplete(e.what());
    code = kExitBudget;
  }
  report.write(out, options.diagnostics);
  log << config.id << ": " << report.rows().size() << " rows -> " << (out / "report.csv").string() << '\n';
  return code;
}

}  // namespace ergode
