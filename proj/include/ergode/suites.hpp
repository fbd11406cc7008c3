#pragma once

#include <cstdint>
#include <vector>

#include "ergode/birkhoff.hpp"
#include "ergode/constructions.hpp"
#include "ergode/entropy.hpp"

namespace ergode {

/// Flow entropy against h(phi^t, Y)/t for each configured t.
struct AbramovTable {
  EntropyEstimate flow;  // direct value, reductions filled in
  double mean_reduction = 0.0;
  double max_pairwise = 0.0;  // max |h_s/s - h_t/t|
  double direct_gap = 0.0;    // |direct - mean_reduction|
};
AbramovTable verify_thm_a(const Flow& flow, const SubsetSpec& Y, const FlowEntropyParams& params = {});

/// Bowen entropy of the frequency-window surrogate of G_mu for the fair-or-not
/// coin (p, 1 - p) on the full 2-shift, window p +- 3 sqrt(p(1 - p)/n).
struct ErgodicCase {
  double p = 0.5;
  std::uint64_t depth = 0;
  double delta = 0.0;
  EntropyValue h_mu;
  EntropyEstimate generic_set;
};
ErgodicCase verify_ergodic_equality(double p, std::uint64_t depth);

/// The mixture of two fair coins on two disjoint full shifts: sampled points
/// are classified against the mixture, and the generic set (orbits spending
/// about half their time on each component) has no admissible words.
struct StrictCase {
  std::size_t sampled = 0;
  std::size_t not_generic = 0;
  std::vector<Verdict> verdicts;
  EntropyValue h_mu;
  EntropyEstimate generic_set;
};
StrictCase verify_strict_case(std::size_t samples, std::uint64_t horizon, std::uint64_t seed, double tol = 0.02);

struct IrregularCase {
  PointGenerator point;
  Verdict verdict;
  SubsetSpec windows;
  EntropyEstimate entropy;
};
/// irregular_point for the frequency of symbol 0 on the full 2-shift, its
/// verdict on a ratio-1.1 schedule, and the entropy of its oscillation windows.
IrregularCase verify_irregular(double lo, double hi, double ratio, std::uint64_t horizon, std::uint64_t depth,
                               double eta = 0.02, double tol = 0.02);

/// Labels of one point under the time-one map and under the flow.
struct InclusionRow {
  std::string kind;  // generic, irregular, random
  Label generic_map = Label::Inconclusive;
  Label generic_flow = Label::Inconclusive;
  Label irregular_map = Label::Inconclusive;
  Label irregular_flow = Label::Inconclusive;
};
struct InclusionSuite {
  std::vector<InclusionRow> rows;
  std::size_t generic_violations = 0;    // Generic for phi^1, NotGeneric for the flow
  std::size_t irregular_violations = 0;  // Irregular for phi^1, Regular for the flow
  std::size_t count(Label InclusionRow::*field, Label l) const;
};
/// Constant integer roof over the full 2-shift; per_kind points of each kind
/// sit at fiber 0.
InclusionSuite verify_inclusions(const Flow& flow, std::size_t per_kind, std::uint64_t horizon, std::uint64_t seed,
                                 double tol = 0.02);

}  // namespace ergode
