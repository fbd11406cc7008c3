#include "ergode/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ergode/errors.hpp"

namespace ergode {

namespace {

void expect_object(const Json& j, const std::string& where) {
  require(j.is_object(), where + ": expected an object");
}

void expect_keys(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  expect_object(j, where);
  for (const auto& [k, v] : j.items()) require(allowed.count(k) > 0, where + ": unknown field '" + k + "'");
}

const Json& field(const Json& j, const std::string& where, const std::string& key) {
  require(j.contains(key), where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  require(j.is_number(), where + ": expected a number");
  const double v = j.get<double>();
  require(std::isfinite(v), where + ": expected a finite number");
  return v;
}

double number_or(const Json& j, const std::string& where, const std::string& key, double fallback) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::int64_t integer(const Json& j, const std::string& where) {
  require(j.is_number_integer(), where + ": expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t count(const Json& j, const std::string& where) {
  const std::int64_t v = integer(j, where);
  require(v >= 0, where + ": expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string text(const Json& j, const std::string& where) {
  require(j.is_string(), where + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  require(j.is_array(), where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Word word(const Json& j, const std::string& where) {
  require(j.is_array(), where + ": expected an array of symbols");
  Word out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::int64_t s = integer(j[i], where + "[" + std::to_string(i) + "]");
    require(s >= 0 && s <= 255, where + ": symbols must lie in 0..255");
    out.push_back(static_cast<Symbol>(s));
  }
  return out;
}

ComponentPath component_path(const Json& j, const std::string& where) {
  const Word w = word(j, where);
  return ComponentPath(w.begin(), w.end());
}

std::uint8_t component_index(const Json& j, const std::string& where) {
  const std::int64_t c = integer(j, where);
  require(c == 0 || c == 1, where + ": component must be 0 or 1");
  return static_cast<std::uint8_t>(c);
}

std::vector<std::pair<double, double>> pairs(const Json& j, const std::string& where) {
  require(j.is_array(), where + ": expected an array of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto xy = numbers(j[i], where + "[" + std::to_string(i) + "]");
    require(xy.size() == 2, where + ": expected [x, y] pairs");
    out.emplace_back(xy[0], xy[1]);
  }
  return out;
}

std::string kind_of(const Json& j, const std::string& where) {
  expect_object(j, where);
  return text(field(j, where, "kind"), where + ".kind");
}

RoofFunction parse_roof(const Json& j) {
  const std::string where = "roof";
  const std::string kind = kind_of(j, where);
  if (kind == "constant") {
    expect_keys(j, where, {"kind", "value"});
    return RoofFunction::constant(number(field(j, where, "value"), "roof.value"));
  }
  if (kind == "cylinder") {
    expect_keys(j, where, {"kind", "depth", "alphabet", "values"});
    return RoofFunction::cylinder(static_cast<int>(integer(field(j, where, "depth"), "roof.depth")),
                                  static_cast<int>(integer(field(j, where, "alphabet"), "roof.alphabet")),
                                  numbers(field(j, where, "values"), "roof.values"));
  }
  throw ValidationError("roof: unknown kind '" + kind + "'");
}

struct ParamRule {
  bool list = false;
  bool integral = false;
  double min = -INFINITY;
  double max = INFINITY;
};

struct CommandShape {
  std::set<std::string> fields;  // beyond command, id, seed, output, params
  std::map<std::string, ParamRule> params;
};

const std::map<std::string, CommandShape>& shapes() {
  const ParamRule depth_list{true, true, 1, 1e9};
  const ParamRule positive_list{true, false, 1e-12, 1e9};
  const ParamRule tol{false, false, 1e-12, 1.0};
  const ParamRule time{false, false, -1e9, 1e9};
  const ParamRule positive{false, false, 1e-12, 1e9};
  const ParamRule depth{false, true, 1, 1e9};
  const ParamRule small{false, true, 1, 64};
  static const std::map<std::string, CommandShape> s = {
      {"entropy",
       {{"system", "flow", "subset"},
        {{"depths", depth_list},
         {"n", depth_list},
         {"eps", positive_list},
         {"alpha_tol", tol},
         {"times", positive_list},
         {"T", positive_list},
         {"arcs", depth_list},
         {"grid", small},
         {"fiber_cells", small}}}},
      {"birkhoff", {{"system", "flow", "points", "observables", "schedule"}, {{"t", time}, {"step", positive}}}},
      {"classify",
       {{"system", "flow", "points", "measure", "measures", "observables", "schedule"},
        {{"t", time}, {"tol", tol}, {"depth", small}, {"harmonics", small}, {"step", positive}}}},
      {"construct", {{"system", "construction"}, {{"emit", depth}}}},
      {"verify-thm-a",
       {{"flow", "subset"}, {{"times", positive_list}, {"depths", depth_list}, {"alpha_tol", tol}, {"fiber_cells", small}}}},
      {"verify-thm-b",
       {{},
        {{"p", ParamRule{true, false, 1e-9, 1 - 1e-9}},
         {"depth", depth},
         {"samples", depth},
         {"horizon", ParamRule{false, true, 2000, 1e9}},
         {"tol", tol}}}},
      {"verify-irregular",
       {{},
        {{"lo", ParamRule{false, false, 0, 1}},
         {"hi", ParamRule{false, false, 0, 1}},
         {"ratio", ParamRule{false, false, 2, 1e6}},
         {"horizon", ParamRule{false, true, 1000, 1e9}},
         {"depth", depth},
         {"eta", tol},
         {"tol", tol}}}},
      {"verify-inclusions",
       {{"flow"}, {{"per_kind", depth}, {"horizon", ParamRule{false, true, 4000, 1e9}}, {"tol", tol}}}},
  };
  return s;
}

ConstructionSpec parse_construction(const Json& j, std::uint64_t seed) {
  const std::string where = "construction";
  ConstructionSpec c;
  c.kind = kind_of(j, where);
  if (c.kind == "generic") {
    expect_keys(j, where, {"kind", "measure", "mode", "horizon"});
    c.measure = parse_measure(field(j, where, "measure"));
    const std::string mode = j.contains("mode") ? text(j.at("mode"), "construction.mode") : "deterministic";
    require(mode == "deterministic" || mode == "iid", "construction.mode must be 'deterministic' or 'iid'");
    c.mode = mode == "iid" ? GenericMode::SeededIid : GenericMode::DeterministicBlocks;
    if (j.contains("horizon")) c.horizon = count(j.at("horizon"), "construction.horizon");
  } else if (c.kind == "irregular") {
    expect_keys(j, where, {"kind", "observable", "lo", "hi", "ratio", "horizon", "first_block"});
    c.observable = parse_observable(field(j, where, "observable"));
    c.lo = number(field(j, where, "lo"), "construction.lo");
    c.hi = number(field(j, where, "hi"), "construction.hi");
    c.ratio = number_or(j, where, "ratio", 4.0);
    if (j.contains("horizon")) c.horizon = count(j.at("horizon"), "construction.horizon");
    if (j.contains("first_block")) c.first_block = count(j.at("first_block"), "construction.first_block");
  } else if (c.kind == "glue") {
    expect_keys(j, where, {"kind", "segments", "mistake", "max_connector"});
    const Json& segs = field(j, where, "segments");
    require(segs.is_array() && !segs.empty(), "construction.segments: expected a nonempty array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string w = "construction.segments[" + std::to_string(i) + "]";
      expect_keys(segs[i], w, {"point", "duration", "eps"});
      const auto pts = parse_points(field(segs[i], w, "point"), seed + i);
      require(pts.size() == 1, w + ".point: expected a single point");
      c.segments.push_back({pts[0], number(field(segs[i], w, "duration"), w + ".duration"), number_or(segs[i], w, "eps", 1.0)});
    }
    c.mistake = parse_mistake(field(j, where, "mistake"));
    if (j.contains("max_connector")) c.max_connector = count(j.at("max_connector"), "construction.max_connector");
  } else {
    throw ValidationError("construction: unknown kind '" + c.kind + "'");
  }
  require(c.horizon >= 1, "construction.horizon must be positive");
  return c;
}

}  // namespace

System parse_system(const Json& j) {
  const std::string where = "system";
  const std::string kind = kind_of(j, where);
  if (kind == "full_shift") {
    expect_keys(j, where, {"kind", "k"});
    return System::full_shift(static_cast<int>(integer(field(j, where, "k"), "system.k")));
  }
  if (kind == "golden_mean") {
    expect_keys(j, where, {"kind"});
    return System::golden_mean();
  }
  if (kind == "markov_shift") {
    expect_keys(j, where, {"kind", "adjacency"});
    const Json& a = field(j, where, "adjacency");
    require(a.is_array(), "system.adjacency: expected a matrix");
    std::vector<std::vector<int>> m;
    for (const auto& row : a) {
      require(row.is_array(), "system.adjacency: expected a matrix");
      std::vector<int> r;
      for (const auto& v : row) r.push_back(static_cast<int>(integer(v, "system.adjacency")));
      m.push_back(std::move(r));
    }
    return System::markov_shift(std::move(m));
  }
  if (kind == "circle_mult") {
    expect_keys(j, where, {"kind", "n"});
    return System::circle_mult(static_cast<int>(integer(field(j, where, "n"), "system.n")));
  }
  if (kind == "circle_rotation") {
    expect_keys(j, where, {"kind", "theta"});
    return System::circle_rotation(number(field(j, where, "theta"), "system.theta"));
  }
  if (kind == "disjoint_union") {
    expect_keys(j, where, {"kind", "left", "right"});
    return System::disjoint_union(parse_system(field(j, where, "left")), parse_system(field(j, where, "right")));
  }
  throw ValidationError("system: unknown kind '" + kind + "'");
}

Flow parse_flow(const Json& j) {
  const std::string where = "flow";
  const std::string kind = kind_of(j, where);
  if (kind == "rotation") {
    expect_keys(j, where, {"kind"});
    return Flow::rotation();
  }
  if (kind == "suspension") {
    expect_keys(j, where, {"kind", "base", "roof"});
    return Flow::suspension(parse_system(field(j, where, "base")), parse_roof(field(j, where, "roof")));
  }
  if (kind == "torus_translation") {
    expect_keys(j, where, {"kind", "velocity"});
    return Flow::torus_translation(numbers(field(j, where, "velocity"), "flow.velocity"));
  }
  throw ValidationError("flow: unknown kind '" + kind + "'");
}

Measure parse_measure(const Json& j, const Flow* flow) {
  const std::string where = "measure";
  const std::string kind = kind_of(j, where);
  if (kind == "bernoulli") {
    expect_keys(j, where, {"kind", "probs"});
    return Measure::bernoulli(numbers(field(j, where, "probs"), "measure.probs"));
  }
  if (kind == "markov") {
    expect_keys(j, where, {"kind", "P"});
    const Json& P = field(j, where, "P");
    require(P.is_array(), "measure.P: expected a matrix");
    std::vector<std::vector<double>> m;
    for (const auto& row : P) m.push_back(numbers(row, "measure.P"));
    return Measure::markov(m);
  }
  if (kind == "lebesgue") {
    expect_keys(j, where, {"kind", "dim"});
    return Measure::lebesgue(j.contains("dim") ? static_cast<int>(integer(j.at("dim"), "measure.dim")) : 1);
  }
  if (kind == "dirac") {
    expect_keys(j, where, {"kind", "point"});
    const auto pts = parse_points(field(j, where, "point"), 0);
    require(pts.size() == 1, "measure.point: expected a single point");
    return Measure::dirac(pts[0]);
  }
  if (kind == "mixture") {
    expect_keys(j, where, {"kind", "parts"});
    const Json& parts = field(j, where, "parts");
    require(parts.is_array(), "measure.parts: expected an array");
    std::vector<std::pair<Measure, double>> out;
    for (const auto& p : parts) {
      expect_keys(p, "measure.parts[]", {"measure", "weight"});
      out.emplace_back(parse_measure(field(p, "measure.parts[]", "measure"), flow),
                       number(field(p, "measure.parts[]", "weight"), "measure.parts[].weight"));
    }
    return Measure::mixture(std::move(out));
  }
  if (kind == "on_component") {
    expect_keys(j, where, {"kind", "component", "measure"});
    return Measure::on_component(component_index(field(j, where, "component"), "measure.component"),
                                 parse_measure(field(j, where, "measure"), flow));
  }
  if (kind == "pushforward" || kind == "time_average") {
    require(flow != nullptr, "measure." + kind + " needs a flow in the config");
    if (kind == "pushforward") {
      expect_keys(j, where, {"kind", "t", "measure"});
      return pushforward(*flow, number(field(j, where, "t"), "measure.t"), parse_measure(field(j, where, "measure"), flow));
    }
    expect_keys(j, where, {"kind", "m", "measure"});
    const int m = j.contains("m") ? static_cast<int>(integer(j.at("m"), "measure.m")) : 16;
    return time_average_measure(*flow, parse_measure(field(j, where, "measure"), flow), m);
  }
  throw ValidationError("measure: unknown kind '" + kind + "'");
}

Observable parse_observable(const Json& j) {
  const std::string where = "observable";
  const std::string kind = kind_of(j, where);
  if (kind == "constant") {
    expect_keys(j, where, {"kind", "c"});
    return Observable::constant(number(field(j, where, "c"), "observable.c"));
  }
  if (kind == "coordinate") {
    expect_keys(j, where, {"kind", "axis"});
    return Observable::coordinate(j.contains("axis") ? static_cast<int>(integer(j.at("axis"), "observable.axis")) : 0);
  }
  if (kind == "cylinder") {
    expect_keys(j, where, {"kind", "word"});
    return Observable::cylinder(word(field(j, where, "word"), "observable.word"));
  }
  if (kind == "symbol_frequency") {
    expect_keys(j, where, {"kind", "symbol"});
    const Word w = word(Json::array({field(j, where, "symbol")}), "observable.symbol");
    return Observable::symbol_frequency(w[0]);
  }
  if (kind == "harmonic") {
    expect_keys(j, where, {"kind", "q", "sine", "axis"});
    bool sine = false;
    if (j.contains("sine")) {
      require(j.at("sine").is_boolean(), "observable.sine: expected a boolean");
      sine = j.at("sine").get<bool>();
    }
    return Observable::harmonic(static_cast<int>(integer(field(j, where, "q"), "observable.q")), sine,
                                j.contains("axis") ? static_cast<int>(integer(j.at("axis"), "observable.axis")) : 0);
  }
  if (kind == "fiber_profile") {
    expect_keys(j, where, {"kind", "base", "knots"});
    return Observable::fiber_profile(parse_observable(field(j, where, "base")), pairs(field(j, where, "knots"), "observable.knots"));
  }
  if (kind == "on_component") {
    expect_keys(j, where, {"kind", "component", "observable"});
    return Observable::on_component(component_index(field(j, where, "component"), "observable.component"),
                                    parse_observable(field(j, where, "observable")));
  }
  throw ValidationError("observable: unknown kind '" + kind + "'");
}

SubsetSpec parse_subset(const Json& j, std::uint64_t seed) {
  const std::string where = "subset";
  const std::string kind = kind_of(j, where);
  auto symbol = [&](const Json& s) { return word(Json::array({s}), "subset.symbol")[0]; };
  if (kind == "whole_space") {
    expect_keys(j, where, {"kind"});
    return SubsetSpec::whole_space();
  }
  if (kind == "frequency_window") {
    expect_keys(j, where, {"kind", "symbol", "lo", "hi"});
    return SubsetSpec::frequency_window(symbol(field(j, where, "symbol")), number(field(j, where, "lo"), "subset.lo"),
                                        number(field(j, where, "hi"), "subset.hi"));
  }
  if (kind == "oscillation_windows") {
    expect_keys(j, where, {"kind", "symbol", "windows"});
    const Json& ws = field(j, where, "windows");
    require(ws.is_array(), "subset.windows: expected an array");
    std::vector<OscillationWindow> out;
    for (const auto& w : ws) {
      expect_keys(w, "subset.windows[]", {"scale", "lo", "hi"});
      out.push_back({count(field(w, "subset.windows[]", "scale"), "subset.windows[].scale"),
                     number(field(w, "subset.windows[]", "lo"), "subset.windows[].lo"),
                     number(field(w, "subset.windows[]", "hi"), "subset.windows[].hi")});
    }
    return SubsetSpec::oscillation_windows(symbol(field(j, where, "symbol")), std::move(out));
  }
  if (kind == "component_window") {
    expect_keys(j, where, {"kind", "component", "lo", "hi"});
    return SubsetSpec::component_window(component_index(field(j, where, "component"), "subset.component"),
                                        number(field(j, where, "lo"), "subset.lo"), number(field(j, where, "hi"), "subset.hi"));
  }
  if (kind == "sample_cloud") {
    expect_keys(j, where, {"kind", "points", "filter"});
    const Json& ps = field(j, where, "points");
    require(ps.is_array(), "subset.points: expected an array");
    std::vector<PointGenerator> pts;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto more = parse_points(ps[i], seed + 7919 * i);
      pts.insert(pts.end(), more.begin(), more.end());
    }
    std::shared_ptr<const SubsetSpec> filter;
    if (j.contains("filter")) filter = std::make_shared<const SubsetSpec>(parse_subset(j.at("filter"), seed));
    return SubsetSpec::sample_cloud(std::move(pts), std::move(filter));
  }
  throw ValidationError("subset: unknown kind '" + kind + "'");
}

Schedule parse_schedule(const Json& j) {
  const std::string where = "schedule";
  expect_object(j, where);
  if (j.contains("checkpoints")) {
    expect_keys(j, where, {"checkpoints"});
    Schedule s{numbers(j.at("checkpoints"), "schedule.checkpoints")};
    require(!s.checkpoints.empty(), "schedule.checkpoints: expected at least one checkpoint");
    for (std::size_t i = 0; i < s.size(); ++i) {
      require(s.checkpoints[i] > 0 && (i == 0 || s.checkpoints[i] > s.checkpoints[i - 1]),
              "schedule.checkpoints: expected positive increasing values");
    }
    return s;
  }
  expect_keys(j, where, {"first", "last", "ratio", "integral"});
  bool integral = true;
  if (j.contains("integral")) {
    require(j.at("integral").is_boolean(), "schedule.integral: expected a boolean");
    integral = j.at("integral").get<bool>();
  }
  return Schedule::geometric(number(field(j, where, "first"), "schedule.first"), number(field(j, where, "last"), "schedule.last"),
                             number_or(j, where, "ratio", 1.5), integral);
}

MistakeFunction parse_mistake(const Json& j) {
  const std::string where = "mistake";
  expect_object(j, where);
  const std::string form = text(field(j, where, "form"), "mistake.form");
  if (form == "zero") {
    expect_keys(j, where, {"form"});
    return MistakeFunction::zero();
  }
  if (form == "power_law") {
    expect_keys(j, where, {"form", "beta", "c_table", "eps0"});
    return MistakeFunction::power_law(number(field(j, where, "beta"), "mistake.beta"), pairs(field(j, where, "c_table"), "mistake.c_table"),
                                      number(field(j, where, "eps0"), "mistake.eps0"));
  }
  if (form == "log_law") {
    expect_keys(j, where, {"form", "c_table", "eps0"});
    return MistakeFunction::log_law(pairs(field(j, where, "c_table"), "mistake.c_table"), number(field(j, where, "eps0"), "mistake.eps0"));
  }
  throw ValidationError("mistake: unknown form '" + form + "'");
}

std::vector<PointGenerator> parse_points(const Json& j, std::uint64_t seed) {
  const std::string where = "point";
  const std::string kind = kind_of(j, where);
  auto decorate = [&](PointGenerator p) {
    if (j.contains("component")) p = p.with_component(component_path(j.at("component"), "point.component"));
    if (j.contains("fiber")) p = p.with_fiber(number(j.at("fiber"), "point.fiber"));
    return p;
  };
  if (kind == "explicit_word") {
    expect_keys(j, where, {"kind", "symbols", "component", "fiber"});
    return {decorate(PointGenerator::explicit_word(word(field(j, where, "symbols"), "point.symbols")))};
  }
  if (kind == "seeded_iid") {
    expect_keys(j, where, {"kind", "seed", "probs", "component", "fiber"});
    return {decorate(PointGenerator::seeded_iid(count(field(j, where, "seed"), "point.seed"), numbers(field(j, where, "probs"), "point.probs")))};
  }
  if (kind == "block_schedule") {
    expect_keys(j, where, {"kind", "blocks", "component", "fiber"});
    const Json& bs = field(j, where, "blocks");
    require(bs.is_array(), "point.blocks: expected an array");
    std::vector<Block> blocks;
    for (const auto& b : bs) {
      expect_keys(b, "point.blocks[]", {"pattern", "length"});
      blocks.push_back({word(field(b, "point.blocks[]", "pattern"), "point.blocks[].pattern"),
                        count(field(b, "point.blocks[]", "length"), "point.blocks[].length")});
    }
    return {decorate(PointGenerator::block_schedule(std::move(blocks)))};
  }
  if (kind == "coordinate") {
    expect_keys(j, where, {"kind", "coords", "component", "fiber"});
    return {decorate(PointGenerator::coordinate(numbers(field(j, where, "coords"), "point.coords")))};
  }
  // samples drawn from the config seed
  if (kind == "iid_sample") {
    expect_keys(j, where, {"kind", "count", "probs", "component", "fiber"});
    const std::uint64_t n = count(field(j, where, "count"), "point.count");
    const auto probs = numbers(field(j, where, "probs"), "point.probs");
    std::vector<PointGenerator> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(decorate(PointGenerator::seeded_iid(seed * 1000003 + i, probs)));
    return out;
  }
  if (kind == "uniform_sample") {
    expect_keys(j, where, {"kind", "count", "dim", "component", "fiber"});
    const std::uint64_t n = count(field(j, where, "count"), "point.count");
    const std::int64_t dim = j.contains("dim") ? integer(j.at("dim"), "point.dim") : 1;
    require(dim >= 1 && dim <= 16, "point.dim must lie in 1..16");
    std::vector<PointGenerator> out;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::vector<double> c;
      for (std::int64_t a = 0; a < dim; ++a) c.push_back(counter_uniform(seed, i * static_cast<std::uint64_t>(dim) + static_cast<std::uint64_t>(a)));
      out.push_back(decorate(PointGenerator::coordinate(std::move(c))));
    }
    return out;
  }
  throw ValidationError("point: unknown kind '" + kind + "'");
}

double ExperimentConfig::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second.front();
}

std::vector<double> ExperimentConfig::param_list(const std::string& key, std::vector<double> fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override) {
  expect_object(j, "config");
  ExperimentConfig c;
  c.raw = j;
  c.command = text(field(j, "config", "command"), "command");
  const auto& all = shapes();
  auto shape = all.find(c.command);
  require(shape != all.end(), "unknown command '" + c.command + "'");
  std::set<std::string> allowed = shape->second.fields;
  allowed.insert({"command", "id", "seed", "output", "params"});
  expect_keys(j, "config", allowed);

  c.id = j.contains("id") ? text(j.at("id"), "id") : c.command;
  require(!c.id.empty(), "id must be nonempty");
  if (j.contains("seed")) c.seed = count(j.at("seed"), "seed");
  if (seed_override) c.seed = *seed_override;
  if (j.contains("output")) c.output = text(j.at("output"), "output");

  if (j.contains("params")) {
    expect_object(j.at("params"), "params");
    for (const auto& [k, v] : j.at("params").items()) {
      auto rule = shape->second.params.find(k);
      require(rule != shape->second.params.end(), "params: unknown field '" + k + "' for " + c.command);
      const ParamRule& r = rule->second;
      std::vector<double> vals = r.list ? numbers(v, "params." + k) : std::vector<double>{number(v, "params." + k)};
      require(!vals.empty(), "params." + k + ": expected at least one value");
      for (double x : vals) {
        require(!r.integral || x == std::floor(x), "params." + k + ": expected integers");
        require(x >= r.min && x <= r.max, "params." + k + ": value out of range");
      }
      c.params[k] = std::move(vals);
    }
  }

  require(!(j.contains("system") && j.contains("flow")), "config: give either system or flow, not both");
  require(!(j.contains("measure") && j.contains("measures")), "config: give either measure or measures, not both");
  if (j.contains("system")) c.system = parse_system(j.at("system"));
  if (j.contains("flow")) c.flow = parse_flow(j.at("flow"));
  const Flow* flow = c.flow ? &*c.flow : nullptr;
  if (j.contains("measure")) c.measures.push_back(parse_measure(j.at("measure"), flow));
  if (j.contains("measures")) {
    require(j.at("measures").is_array() && !j.at("measures").empty(), "measures: expected a nonempty array");
    for (const auto& m : j.at("measures")) c.measures.push_back(parse_measure(m, flow));
  }
  if (j.contains("subset")) c.subset = parse_subset(j.at("subset"), c.seed);
  if (j.contains("schedule")) c.schedule = parse_schedule(j.at("schedule"));
  if (j.contains("points")) {
    require(j.at("points").is_array(), "points: expected an array");
    const Json& ps = j.at("points");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto more = parse_points(ps[i], c.seed + 7919 * i);
      c.points.insert(c.points.end(), more.begin(), more.end());
    }
  }
  if (j.contains("observables")) {
    require(j.at("observables").is_array(), "observables: expected an array");
    for (const auto& o : j.at("observables")) c.observables.push_back(parse_observable(o));
  }
  if (j.contains("construction")) c.construction = parse_construction(j.at("construction"), c.seed);

  // per-command requirements
  const bool dyn = c.system || c.flow;
  if (c.command == "entropy") require(dyn, "entropy needs a system or a flow");
  if (c.command == "birkhoff") {
    require(dyn && !c.points.empty() && !c.observables.empty(), "birkhoff needs a system or flow, points and observables");
  }
  if (c.command == "classify") {
    require(dyn && !c.points.empty(), "classify needs a system or flow and points");
    require(!c.measures.empty() || !c.observables.empty(), "classify needs target measures or observables");
  }
  if (c.command == "birkhoff" || c.command == "classify") {
    require(!c.params.count("t") || c.flow, "params.t needs a flow");
    for (const auto& p : c.points) {
      if (c.system) check_point(*c.system, p);
      if (c.flow) check_point(*c.flow, p);
    }
  }
  if (c.command == "construct") {
    require(c.construction.has_value(), "construct needs a construction");
    require(c.construction->kind == "generic" || c.system, "construct " + c.construction->kind + " needs a system");
  }
  if (c.command == "verify-thm-a" || c.command == "verify-inclusions") require(c.flow.has_value(), c.command + " needs a flow");
  if (c.command == "verify-irregular") require(c.param("lo", 0.3) <= c.param("hi", 0.7), "params: lo must not exceed hi");
  return c;
}

}  // namespace ergode
