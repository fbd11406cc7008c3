#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ergode/point.hpp"

namespace ergode {

class System;
class Flow;

struct FullShift {
  int k = 2;
};

struct MarkovShift {
  int k = 2;
  std::vector<std::uint8_t> adjacency;  // row-major k*k, 1 = transition allowed

  bool allowed(Symbol a, Symbol b) const { return adjacency[static_cast<std::size_t>(a) * k + b] != 0; }
};

/// x -> n x mod 1 on the circle.
struct CircleMult {
  int n = 2;
};

/// x -> x + theta mod 1 on the circle.
struct CircleRotation {
  double theta = 0.0;
};

/// Two systems side by side; the metric between components is the constant 1.
struct DisjointUnion {
  std::shared_ptr<const System> left;
  std::shared_ptr<const System> right;
};

/// Immutable description of a discrete map f: X -> X.
class System {
 public:
  using Kind = std::variant<FullShift, MarkovShift, CircleMult, CircleRotation, DisjointUnion>;

  static System full_shift(int k);
  static System markov_shift(std::vector<std::vector<int>> adjacency);
  static System golden_mean();
  static System circle_mult(int n);
  static System circle_rotation(double theta);
  static System disjoint_union(System left, System right);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  /// Shift spaces and disjoint unions of shift spaces.
  bool is_symbolic() const;
  bool is_circle() const;
  /// Largest alphabet among symbolic leaves.
  int alphabet_size() const;
  /// Leaf reached by following a component path through nested unions.
  const System& leaf(const ComponentPath& path) const;
  /// All component paths that end at a non-union system, left first.
  std::vector<ComponentPath> leaf_paths() const;
  /// k x k adjacency (all ones for a full shift); symbolic leaves only.
  std::vector<std::uint8_t> adjacency() const;
  bool allowed(Symbol a, Symbol b) const;
  bool is_invertible() const;

  std::string describe() const;

 private:
  explicit System(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Roof over a symbolic (or circle) base: constant when depth = 0, otherwise
/// a value for each depth-`depth` cylinder indexed base-k, first symbol most
/// significant.
class RoofFunction {
 public:
  static RoofFunction constant(double value);
  static RoofFunction cylinder(int depth, int alphabet, std::vector<double> values);

  int depth() const { return depth_; }
  int alphabet() const { return alphabet_; }
  const std::vector<double>& values() const { return values_; }
  double min() const { return min_; }
  double max() const { return max_; }
  bool is_constant() const { return depth_ == 0 || min_ == max_; }

  /// Roof at a base point whose upcoming symbols start at `window`.
  double at(std::span<const Symbol> window) const;
  double at(const PointGenerator& base_point) const;

 private:
  int depth_ = 0;
  int alphabet_ = 0;
  std::vector<double> values_;
  double min_ = 1.0;
  double max_ = 1.0;
};

/// phi^t(x) = x + t on the circle.
struct RotationFlow {};

/// Unit-speed vertical flow under a roof, jumping by the base map at the roof.
struct Suspension {
  std::shared_ptr<const System> base;
  RoofFunction roof;
};

struct TorusTranslation {
  std::vector<double> velocity;
};

/// Immutable description of a flow Phi = {phi^t}.
class Flow {
 public:
  using Kind = std::variant<RotationFlow, Suspension, TorusTranslation>;

  static Flow rotation();
  static Flow suspension(System base, RoofFunction roof);
  static Flow torus_translation(std::vector<double> velocity);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  bool is_invertible() const;
  std::string describe() const;

 private:
  explicit Flow(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// The time-t map of a flow, viewed as a discrete system.
struct TimeMap {
  std::shared_ptr<const Flow> flow;
  double t = 1.0;
};

/// Anything that can be iterated step by step: a map, or a flow's time-t map.
using MapDynamics = std::variant<System, TimeMap>;

TimeMap time_map(const Flow& flow, double t);
std::string describe(const MapDynamics& dyn);

/// Throws ValidationError when x cannot be a point of `system`.
void check_point(const System& system, const PointGenerator& x);
void check_point(const Flow& flow, const PointGenerator& x);

PointGenerator step(const System& system, const PointGenerator& x);
PointGenerator step(const MapDynamics& dyn, const PointGenerator& x);
PointGenerator iterate(const MapDynamics& dyn, const PointGenerator& x, std::uint64_t n);

/// phi^t(x). Negative t is accepted only for invertible flows.
PointGenerator time_t_map(const Flow& flow, double t, const PointGenerator& x);

/// Metric attached to a system or flow.
class MetricSpec {
 public:
  struct Symbolic {};
  struct Circle {};
  struct Torus {
    int dim = 1;
  };
  struct OfSuspension {
    std::shared_ptr<const MetricSpec> base;
    double roof_max = 1.0;
  };
  struct Union {
    std::shared_ptr<const MetricSpec> left;
    std::shared_ptr<const MetricSpec> right;
  };
  using Kind = std::variant<Symbolic, Circle, Torus, OfSuspension, Union>;

  static MetricSpec of(const System& system);
  static MetricSpec of(const Flow& flow);

  const Kind& kind() const { return kind_; }

 private:
  explicit MetricSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

struct Distance {
  double value = 0.0;
  bool truncated = false;  // symbolic scan hit the horizon without a disagreement
};

Distance distance(const MetricSpec& metric, const PointGenerator& x, const PointGenerator& y,
                  std::size_t horizon);

/// Arc distance on R/Z.
double circle_gap(double a, double b);

}  // namespace ergode
