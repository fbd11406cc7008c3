#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergode/measures.hpp"
#include "ergode/observables.hpp"
#include "ergode/systems.hpp"
#include "ergode/word_count.hpp"

namespace ergode {

enum class GenericMode { DeterministicBlocks, SeededIid };

struct GenericPoint {
  PointGenerator point;
  bool probabilistic = false;  // seeded-iid: generic with probability one only
};

/// A point whose empirical measures approach mu (Bernoulli or Markov). The
/// deterministic mode concatenates, level by level, pools of length-L words
/// with multiplicities proportional to their masses; transitions between
/// consecutive words follow the chain. Symbols past `horizon` repeat the last level.
GenericPoint generic_point(const Measure& mu, GenericMode mode, std::uint64_t horizon, std::uint64_t seed = 0);

/// Blocks alternating between balanced patterns of symbol-a frequency lo and
/// hi; each block makes the prefix `ratio` times longer, so prefix
/// frequencies oscillate by at least (hi - lo)(1 - 2/ratio).
PointGenerator irregular_point(const System& system, const Observable& phi, double target_lo, double target_hi,
                               double ratio, std::uint64_t horizon, std::uint64_t first_block = 250);

/// Windows on prefix frequencies of `a` at the block boundaries of a block
/// schedule (up to max_scale), one-sided around x's own prefix frequency f:
/// [0, f + eta] after a block that pulled the average down, [f - eta, 1]
/// after one that pushed it up.
SubsetSpec oscillation_windows_for(const PointGenerator& x, Symbol a, double eta = 0.02,
                                   std::uint64_t max_scale = kUnbounded);

/// g(t, eps): c(eps) t^beta or c(eps) log(1 + t), or identically zero.
/// c is a step function over an increasing eps grid with nonincreasing
/// values, frozen at eps0 for larger eps.
class MistakeFunction {
 public:
  enum class Form { Zero, PowerLaw, LogLaw };

  static MistakeFunction zero();
  static MistakeFunction power_law(double beta, std::vector<std::pair<double, double>> c_table, double eps0);
  static MistakeFunction log_law(std::vector<std::pair<double, double>> c_table, double eps0);

  double operator()(double t, double eps) const;
  double c(double eps) const;
  Form form() const { return form_; }
  double beta() const { return beta_; }
  double eps0() const { return eps0_; }
  std::string describe() const;

 private:
  Form form_ = Form::Zero;
  double beta_ = 0.0;
  std::vector<std::pair<double, double>> table_;
  double eps0_ = 1.0;
};

struct Membership {
  bool member = false;
  double mistakes = 0.0;  // counting measure (maps) or step * count (flows)
  double budget = 0.0;    // g(T, eps)
  double density = 0.0;   // mistakes / T
};

/// y in B_T(g | x, eps): the times with d(f^t x, f^t y) >= eps have measure
/// at most g(T, eps). Maps use t = 0..T-1.
Membership mistake_ball_membership(const MapDynamics& dyn, const PointGenerator& x, const PointGenerator& y,
                                   std::uint64_t T, const MistakeFunction& g, double eps);
/// Flow variant over sampled times j * step < T.
Membership mistake_ball_membership(const Flow& flow, const PointGenerator& x, const PointGenerator& y, double T,
                                   const MistakeFunction& g, double eps, double step);

struct OrbitSpecSegment {
  PointGenerator target;
  double duration = 0.0;
  double eps = 1.0;
};

struct GlueResult {
  PointGenerator point;
  std::vector<std::uint64_t> starts;        // T_j
  std::vector<std::size_t> connector_lengths;
  std::vector<Membership> checks;
};

/// Mistakes per segment the gluing may need: connector length plus the
/// symbols a disagreement at the segment end can reach back over at eps.
std::uint64_t gluing_overhead(const System& system, double eps);
/// Smallest duration t with g(t, eps) >= gluing_overhead(system, eps);
/// +inf when no duration suffices.
double declared_T_g(const System& system, const MistakeFunction& g, double eps);

/// z with f^{T_j}(z) in B_{t_j}(g | x_j, eps_j), T_j = t_0 + ... + t_{j-1}.
/// Full shifts concatenate exactly; Markov shifts overwrite the start of a
/// segment with the shortest connector. Every segment is re-checked.
GlueResult glue_orbits(const System& system, const std::vector<OrbitSpecSegment>& segments, const MistakeFunction& g,
                       std::size_t max_connector = 8);

struct Counterexample {
  System system;
  Flow flow;
  Measure mu;       // on the base
  Measure mu_flow;  // the flow-invariant time average of its lift
};

/// Two full 2-shifts side by side, their unit-roof suspension and the
/// half-half mixture of fair coins on the two components.
Counterexample build_counterexample_system();

}  // namespace ergode
