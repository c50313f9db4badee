#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "bnexplain/factor.hpp"
#include "bnexplain/factor_graph.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain {

enum class Schedule {
  kFlooding,    // synchronous: every message recomputed from the previous sweep
  kSequential,  // in-place updates in a (possibly shuffled) edge order
};

struct LoopyConfig {
  double damping = 0.5;
  double tolerance = 1e-9;
  std::size_t max_iterations = 500;
  Schedule schedule = Schedule::kFlooding;
  /// Shuffles the sequential edge order when set.
  std::optional<std::uint64_t> order_seed;
};

struct LoopyResult {
  BeliefUpdate marginal;
  bool converged;
  std::size_t iterations;
  double residual;
};

/// Sum-product message passing on the factor graph. Observed variables get
/// lopsided potentials; messages start uniform and are normalized after
/// every update. The returned marginal is normalized; when the residual
/// never drops below tolerance the result is still returned with
/// `converged == false`.
LoopyResult loopy_posterior(const FactorGraph& fg, const Evidence& evidence, std::size_t target,
                            const LoopyConfig& config = {});

/// Marginal of `target` with no evidence, as computed by message passing.
LoopyResult prior_marginal(const FactorGraph& fg, std::size_t target, const LoopyConfig& config = {});

/// Variable elimination with a greedy min-fill order. Throws CapacityError
/// above `max_variables` and NumericError when the evidence has probability 0.
BeliefUpdate exact_posterior(const BayesianNetwork& bn, const Evidence& evidence, std::size_t target,
                             std::size_t max_variables = 25);

}  // namespace bnexplain
