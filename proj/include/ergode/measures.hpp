#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergode/observables.hpp"
#include "ergode/point.hpp"
#include "ergode/systems.hpp"

namespace ergode {

class Measure;

struct Bernoulli {
  std::vector<double> probs;
};
struct Markov {
  int k = 2;
  std::vector<double> P;  // row-major k*k, rows sum to 1
  std::vector<double> pi;
};
/// Haar measure on the circle (dim 1) or torus.
struct Lebesgue {
  int dim = 1;
};
struct Atomic {
  std::vector<PointGenerator> points;
  std::vector<double> weights;
};
struct Mixture {
  std::vector<std::shared_ptr<const Measure>> parts;
  std::vector<double> weights;
};
/// `inner` placed on disjoint-union component c.
struct OnComponent {
  std::uint8_t c = 0;
  std::shared_ptr<const Measure> inner;
};
/// phi^t_* base, integrated as the integral of (obs o phi^t) against base.
struct TimeShifted {
  std::shared_ptr<const Flow> flow;
  double t = 0.0;
  std::shared_ptr<const Measure> base;
};
/// (1/m) sum_j phi^{s_j}_* base with midpoint times s_j = (j + 1/2)/m.
struct TimeAveraged {
  std::shared_ptr<const Flow> flow;
  std::shared_ptr<const Measure> base;
  int m = 16;
};

/// Bernoulli and Markov measures placed in a suspension live on the zero
/// section {(x, 0)}; Lebesgue in a suspension over a circle base likewise.
class Measure {
 public:
  using Kind = std::variant<Bernoulli, Markov, Lebesgue, Atomic, Mixture, OnComponent, TimeShifted, TimeAveraged>;

  static Measure bernoulli(std::vector<double> probs);
  /// Stationary vector solved from P.
  static Measure markov(const std::vector<std::vector<double>>& P);
  static Measure lebesgue(int dim = 1);
  static Measure atomic(std::vector<PointGenerator> points, std::vector<double> weights);
  static Measure dirac(PointGenerator x);
  static Measure mixture(std::vector<std::pair<Measure, double>> parts);
  static Measure on_component(std::uint8_t c, Measure inner);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  /// Bernoulli and Markov kinds (possibly placed on a component) are ergodic
  /// for their shift; mixtures of distinct parts are not.
  bool is_ergodic_kind() const;
  double total_mass() const;
  std::string describe() const;

 private:
  friend Measure pushforward(const Flow&, double, const Measure&);
  friend Measure time_average_measure(const Flow&, const Measure&, int);
  explicit Measure(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

struct Integral {
  double value = 0.0;
  double bound = 0.0;  // declared quadrature error bound, 0 when exact
};

double integrate(const Measure& mu, const Observable& phi);
Integral integrate_with_bound(const Measure& mu, const Observable& phi);

/// mu([w]) on the given component path (empty path for a plain shift).
double cylinder_mass(const Measure& mu, std::span<const Symbol> word, const ComponentPath& path = {});

Measure pushforward(const Flow& flow, double t, const Measure& mu);
Measure time_average_measure(const Flow& flow, const Measure& mu, int m = 16);

/// sum_i w_i |d_i| / (1 + |d_i|), d_i the difference of the i-th family integrals.
double weak_star_distance(const Measure& mu, const Measure& nu, const TestFamily& fam);
/// Same, against a precomputed vector of family integrals.
double weak_star_distance(const std::vector<double>& a, const std::vector<double>& b, const TestFamily& fam);
std::vector<double> family_integrals(const Measure& mu, const TestFamily& fam);

struct EntropyValue {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool estimated = false;  // partition estimate rather than closed form
  bool warning = false;    // invariance not checkable (atomic) or partition not generating
  std::string note;
};

/// Throws ValidationError when mu is checkably not invariant for the system.
/// Returns false (no throw) for atomic parts, where the check is skipped.
bool check_invariant(const Measure& mu, const System& system);

EntropyValue metric_entropy(const Measure& mu, const System& system);
/// h_mu of the time-one map of the flow.
EntropyValue metric_entropy(const Measure& mu, const Flow& flow);

/// H_mu(P v f^-1 P v ... v f^-(depth-1) P) / depth for the canonical partition
/// of the dynamics; lower bracket is the conditional step H_depth - H_(depth-1).
EntropyValue partition_entropy_estimate(const Measure& mu, const MapDynamics& dyn, int depth);

/// Entropy of the cylinder partition at one depth, summed with the given kernel flavour.
double cylinder_partition_entropy(const Measure& mu, const System& system, int depth, bool use_parallel = true);

}  // namespace ergode
