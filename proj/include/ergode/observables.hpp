#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergode/point.hpp"
#include "ergode/systems.hpp"

namespace ergode {

class Observable;

/// What an observable may look at: upcoming symbols, the component path,
/// the fiber height and the real coordinates of a point.
struct PointView {
  std::span<const Symbol> symbols;
  std::span<const std::uint8_t> component;
  std::optional<double> fiber;
  std::span<const double> coords;
  double circle = 0.0;  // circle coordinate, meaningful for circle points
};

struct ConstantObs {
  double c = 1.0;
};
struct CoordinateObs {
  int axis = 0;
};
/// Indicator of the cylinder [w] at position 0.
struct CylinderIndicator {
  Word word;
};
/// Indicator of x_0 = a.
struct SymbolFrequency {
  Symbol a = 0;
};
/// cos(2 pi q x) or sin(2 pi q x) on one axis.
struct Harmonic {
  int q = 1;
  bool sine = false;
  int axis = 0;
};
/// base(x) * profile(s), profile piecewise linear through `knots` in the
/// absolute fiber height s, constant beyond the end knots.
struct FiberProfile {
  std::shared_ptr<const Observable> base;
  std::vector<std::pair<double, double>> knots;
};
/// inner(x) on disjoint-union component `c`, 0 elsewhere.
struct OnComponentObs {
  std::uint8_t c = 0;
  std::shared_ptr<const Observable> inner;
};

class Observable {
 public:
  using Kind = std::variant<ConstantObs, CoordinateObs, CylinderIndicator, SymbolFrequency, Harmonic, FiberProfile,
                            OnComponentObs>;

  static Observable constant(double c);
  static Observable coordinate(int axis = 0);
  static Observable cylinder(Word w);
  static Observable symbol_frequency(Symbol a);
  static Observable harmonic(int q, bool sine, int axis = 0);
  static Observable fiber_profile(Observable base, std::vector<std::pair<double, double>> knots);
  static Observable on_component(std::uint8_t c, Observable inner);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  double eval(const PointView& v) const;
  double eval(const PointGenerator& x) const;

  /// Number of upcoming symbols eval() reads.
  std::size_t window() const;
  bool needs_symbols() const;
  bool needs_coords() const;
  bool uses_fiber() const;
  double sup_norm() const;
  /// Bound on |d/ds| along the flow direction inside one roof cell (or along
  /// a rotation orbit), ignoring jumps at roof crossings.
  double flow_lipschitz() const;
  /// Bound on the second flow derivative, for trapezoid error bounds.
  double flow_second_derivative() const;

  std::string describe() const;

 private:
  explicit Observable(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

double profile_at(const std::vector<std::pair<double, double>>& knots, double s);
/// Exact integral of the piecewise-linear profile over [a, b].
double profile_integral(const std::vector<std::pair<double, double>>& knots, double a, double b);

/// Ordered observables with weights 2^-(i+1); metrizes weak-* convergence.
struct TestFamily {
  std::vector<Observable> observables;
  std::vector<double> weights;

  static TestFamily from(std::vector<Observable> obs);
  /// Symbol frequencies, then cylinders of depth 2..depth (shifts); harmonics
  /// q = 1..harmonics, cosine then sine (circles); component indicators first
  /// for disjoint unions.
  static TestFamily for_system(const System& system, int depth = 6, int harmonics = 8);
  /// Base family times the fiber profiles {1, tent} for suspensions.
  static TestFamily for_flow(const Flow& flow, int depth = 6, int harmonics = 8);

  std::size_t size() const { return observables.size(); }
};

}  // namespace ergode
