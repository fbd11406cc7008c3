#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ergode/systems.hpp"
#include "ergode/word_count.hpp"

namespace ergode {

/// Cylinder [word] on the leaf at `path`.
struct CylinderBody {
  Word word;
  ComponentPath path;
};
/// Closed arc of the given radius around `center` on the circle.
struct ArcBody {
  double center = 0.0;
  double radius = 0.0;
};
/// [word] x [a, b] in a suspension, fiber heights measured in the first cell.
struct ProductBody {
  Word word;
  double a = 0.0;
  double b = 0.0;
};
using CoverBody = std::variant<CylinderBody, ArcBody, ProductBody>;

struct CoverElement {
  CoverBody body;
  double N = 0.0;  // may be +inf
  double D = 1.0;
  double N_uncertainty = 0.0;
};

/// Finite open covers the weights are measured against.
struct OneCylinders {};
/// Arcs (i/G - 1/G, i/G + 1/G), i < G.
struct ArcGrid {
  int G = 16;
};
/// 1-cylinders times fiber windows of length 3r/4 starting at multiples of
/// r/4 (r the roof); a window that runs over the roof is labelled by the
/// symbol of the cell it enters.
struct ProductWindows {};
using OpenCoverSpec = std::variant<OneCylinders, ArcGrid, ProductWindows>;

/// sum D(B)^alpha with 0^alpha = 0. Throws for alpha <= 0 when some D = 0.
double caratheodory_sum(const std::vector<CoverElement>& cover, double alpha);

CoverElement cover_weight(const System& system, const OpenCoverSpec& cover, const CoverBody& body);
/// Real-valued N, advanced in sub-steps of roof_min/4 (suspensions) and
/// reported with that uncertainty.
CoverElement cover_weight(const Flow& flow, const OpenCoverSpec& cover, const CoverBody& body);
/// Discrete N for the time-t map of a flow.
CoverElement cover_weight(const TimeMap& map, const OpenCoverSpec& cover, const CoverBody& body);

struct BisectionStep {
  double lo = 0.0;
  double hi = 0.0;
};

struct DepthTrace {
  double n = 0;               // depth (maps) or word depth (flows)
  double log_cover_size = 0;  // log number of bodies
  double alpha_closed = 0;    // log #words / n
  double alpha = 0;           // bisected critical exponent
  std::vector<BisectionStep> bisection;
};

struct Reduction {
  double t = 0.0;
  double h = 0.0;  // h(phi^t, Y)
  double h_over_t = 0.0;
};

struct EntropyEstimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string method;  // spanning, caratheodory-symbolic, caratheodory-metric, word-count
  std::string params;
  bool empty_cover = false;
  bool inconclusive = false;
  bool upper_bound_only = false;
  std::vector<DepthTrace> trace;
  std::vector<Reduction> reductions;
  std::string note;
};

/// Bowen-Caratheodory entropy of Y for a symbolic system: Y is covered by
/// its admissible depth-n cylinders against the 1-cylinder cover, and the
/// critical exponent of S_alpha is bisected to alpha_tol at each depth.
EntropyEstimate bowen_entropy_symbolic(const System& system, const SubsetSpec& Y, const std::vector<std::uint64_t>& depths,
                                       double alpha_tol = 1e-3);

/// Circle maps against an arc grid; the bodies are M equal arcs and the
/// sweep runs over M.
EntropyEstimate bowen_entropy_metric(const System& system, const std::vector<int>& arcs, int grid = 16,
                                     double alpha_tol = 1e-3);

struct FlowEntropyParams {
  std::vector<std::uint64_t> depths = {200, 400, 800, 1600};
  std::vector<double> times = {0.5, 1.0, 2.0};
  double alpha_tol = 1e-3;
  int fiber_cells = 2;  // fiber partition of each roof cell into pieces of length roof/fiber_cells
};

/// Direct flow value over product bodies, plus h(phi^t, Y)/t for each t via
/// the time-t maps (in `reductions`).
EntropyEstimate bowen_entropy_flow(const Flow& flow, const SubsetSpec& Y, const FlowEntropyParams& params = {});
/// h(phi^t, Y) for the time-t map of a suspension over a shift or a rotation flow.
EntropyEstimate bowen_entropy_time_map(const TimeMap& map, const SubsetSpec& Y, const FlowEntropyParams& params = {});

/// Growth rate of minimal (n, eps)-spanning sets; value is the slope of
/// log r_n against n at the smallest eps.
EntropyEstimate spanning_entropy(const System& system, const SubsetSpec& K, const std::vector<std::uint64_t>& n_list,
                                 const std::vector<double>& eps_list, std::size_t sampler_budget = 1 << 16);
EntropyEstimate spanning_entropy(const Flow& flow, const SubsetSpec& K, const std::vector<double>& T_list,
                                 const std::vector<double>& eps_list, std::size_t sampler_budget = 1 << 14);

}  // namespace ergode
