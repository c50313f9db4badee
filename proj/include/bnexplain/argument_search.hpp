#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bnexplain/factor_argument.hpp"
#include "bnexplain/factor_graph.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain {

struct FaParams {
  /// Longest simple path considered, in variable-node hops.
  std::size_t ml = kUnbounded;
  /// Most simple paths combined into one candidate.
  std::size_t mc = 2;
  /// Distance below which a partition counts as independent.
  double dt = 0.1;
  std::size_t top_n = kUnbounded;
  /// Arguments with |strength| below this are dropped from the output.
  double min_strength = 0.0;
  std::size_t max_paths = 10000;
  std::size_t max_combinations = 500000;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

struct RankedFa {
  FactorArgument argument;
  BeliefUpdate effect;
  double strength;
  std::size_t argued_state;
  FaTrace trace;
  std::string encoding;
};

/// Candidate simple-path arguments from every observed variable to `target`.
/// Other observed variables never appear as intermediate nodes.
std::vector<FactorArgument> path_arguments(const FactorGraph& fg, std::size_t target,
                                           const Evidence& evidence, const FaParams& params);

/// Proper, pairwise independent, maximal arguments for `target`, ordered by
/// descending |strength|. Infinite strengths come first; ties go to the
/// smaller argument, then to the encoding.
///
/// Throws CapacityError when the path or combination budget, or the
/// deadline, is exceeded.
std::vector<RankedFa> find_maximal_proper_fas(const BayesianNetwork& bn, const FactorGraph& fg,
                                              std::size_t target, const Evidence& evidence,
                                              const FaParams& params = {});

/// Scores a single argument for presentation.
RankedFa rank_argument(const FactorGraph& fg, const FactorArgument& fa, const Evidence& evidence);

/// Normalized product of `prior` and every argument effect.
BeliefUpdate approximate_posterior(const BeliefUpdate& prior, const std::vector<RankedFa>& fas);

}  // namespace bnexplain
