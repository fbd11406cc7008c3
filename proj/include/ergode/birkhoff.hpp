#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ergode/measures.hpp"
#include "ergode/observables.hpp"
#include "ergode/systems.hpp"

namespace ergode {

/// Increasing checkpoints: integers for maps, reals for flows.
struct Schedule {
  std::vector<double> checkpoints;

  /// ceil(first * ratio^j) up to `last` (last itself included), rounded to
  /// integers when `integral`.
  static Schedule geometric(double first, double last, double ratio, bool integral);
  static Schedule map_default() { return geometric(1e3, 1e6, 1.5, true); }
  static Schedule flow_default() { return geometric(1e2, 1e4, 1.5, false); }

  double last() const { return checkpoints.back(); }
  std::size_t size() const { return checkpoints.size(); }
};

/// Averages of several observables at every checkpoint: values[obs][checkpoint].
struct AverageTable {
  std::vector<std::vector<double>> values;
  std::vector<double> bounds;  // per observable quadrature bound (flows), 0 for maps
};

double birkhoff_average_map(const MapDynamics& dyn, const Observable& phi, const PointGenerator& x, std::uint64_t n);
AverageTable map_averages(const MapDynamics& dyn, const std::vector<Observable>& obs, const PointGenerator& x,
                          const Schedule& schedule, bool use_parallel = true);

struct FlowAverage {
  double value = 0.0;
  double bound = 0.0;
};

/// (1/T) * integral_0^T phi(phi^t x) dt. Suspensions over shifts are
/// integrated exactly cell by cell; rotation and translation flows use the
/// trapezoid rule with the given step.
FlowAverage birkhoff_average_flow(const Flow& flow, const Observable& phi, const PointGenerator& x, double T,
                                  double step = 0.01);
AverageTable flow_averages(const Flow& flow, const std::vector<Observable>& obs, const PointGenerator& x,
                           const Schedule& schedule, double step = 0.01);

/// xi_n(x): uniform weights on x, f x, ..., f^{n-1} x, equal atoms merged.
Measure empirical_measure(const MapDynamics& dyn, const PointGenerator& x, std::uint64_t n);

struct Cluster {
  std::vector<double> integrals;    // family integrals of the first member
  std::vector<double> checkpoints;  // members
};

/// Single-linkage clusters (radius tol, weak-* distance on the family) of
/// the empirical measures at the checkpoints.
std::vector<Cluster> limit_point_set(const MapDynamics& dyn, const PointGenerator& x, const Schedule& schedule,
                                     const TestFamily& fam, double tol);

enum class Label { Generic, NotGeneric, Irregular, Regular, Inconclusive };
std::string to_string(Label l);

struct Verdict {
  Label label = Label::Inconclusive;
  std::string witness;            // observable justifying the label
  double witness_checkpoint = 0;  // checkpoint at which it was read
  double gap = 0.0;
  std::size_t checkpoints_used = 0;
};

/// Generic: every family average is within tol of the target at the last two
/// checkpoints and moved by less than tol/2 between them. NotGeneric: some
/// average is at least 3 tol off at both. Otherwise Inconclusive.
Verdict classify_generic(const AverageTable& averages, const std::vector<double>& targets, const TestFamily& fam,
                         const Schedule& schedule, double tol);
Verdict classify_generic(const MapDynamics& dyn, const PointGenerator& x, const Measure& mu, const TestFamily& fam,
                         const Schedule& schedule, double tol);
Verdict classify_generic(const Flow& flow, const PointGenerator& x, const Measure& mu, const TestFamily& fam,
                         const Schedule& schedule, double tol, double step = 0.01);

/// Oscillation (max - min) of the averages over the last half of the
/// checkpoints: above 3 tol Irregular, below tol Regular.
Verdict classify_irregular(const std::vector<double>& averages, const Observable& phi, const Schedule& schedule,
                           double tol);
Verdict classify_irregular(const MapDynamics& dyn, const PointGenerator& x, const Observable& phi,
                           const Schedule& schedule, double tol);
Verdict classify_irregular(const Flow& flow, const PointGenerator& x, const Observable& phi, const Schedule& schedule,
                           double tol, double step = 0.01);

}  // namespace ergode
