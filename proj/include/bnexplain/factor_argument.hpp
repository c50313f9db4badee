#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnexplain/factor.hpp"
#include "bnexplain/factor_graph.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain {

struct FaEdge {
  NodeId from;
  NodeId to;

  friend auto operator<=>(const FaEdge&, const FaEdge&) = default;
};

/// Directed acyclic subgraph of a factor graph that carries evidence from
/// its sources (variable nodes) to a single sink variable node, the target.
///
/// Edges are stored sorted and deduplicated, so two arguments over the same
/// edge set compare equal regardless of how they were built.
class FactorArgument {
 public:
  /// Validates skeleton, alternation, acyclicity and the single-sink rule.
  FactorArgument(const FactorGraph& fg, std::vector<FaEdge> edges, NodeId target);

  static FactorArgument from_path(const FactorGraph& fg, const Path& path);

  const std::vector<FaEdge>& edges() const { return edges_; }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  NodeId target() const { return target_; }
  std::vector<NodeId> sources() const;

  bool contains(NodeId n) const;
  std::vector<NodeId> predecessors(NodeId n) const;
  std::vector<NodeId> successors(NodeId n) const;

  /// Kahn order with ties broken by node name.
  std::vector<NodeId> topological_order(const FactorGraph& fg) const;

  /// Sorted "from→to" node-name pairs joined by ';'.
  std::string encoding(const FactorGraph& fg) const;

  /// Node-set and edge-set containment.
  bool is_subgraph_of(const FactorArgument& other) const;

  /// Longest source→target path, counted in variable-node hops.
  std::size_t length(const FactorGraph& fg) const;

  friend bool operator==(const FactorArgument& a, const FactorArgument& b) {
    return a.target_ == b.target_ && a.edges_ == b.edges_;
  }

 private:
  FactorArgument() = default;
  friend std::optional<FactorArgument> try_compose(const FactorGraph&, const std::vector<FactorArgument>&);

  std::vector<FaEdge> edges_;
  std::vector<NodeId> nodes_;
  NodeId target_ = 0;
};

/// Graph union of arguments sharing a target. Throws ValidationError when
/// the targets differ or the union is not acyclic.
FactorArgument compose_fas(const FactorGraph& fg, const std::vector<FactorArgument>& parts);

/// Like compose_fas, but returns nullopt when the union has a directed cycle.
std::optional<FactorArgument> try_compose(const FactorGraph& fg, const std::vector<FactorArgument>& parts);

/// Belief change that factor `phi` induces on `successor` given premise
/// updates on its predecessors:
///
///   num = project_successor( normalize(phi * prod(premises)) )
///   den = normalize( project_successor(phi) )
///   SE  = normalize(num / den)
///
/// Projection onto the successor happens before division, so variables of
/// `phi` that are neither premises nor the successor are summed out of
/// numerator and denominator alike.
BeliefUpdate step_effect(const Factor& phi, const std::vector<BeliefUpdate>& premises,
                         const VariableRef& successor);

/// One inference step of an argument: a factor node and one successor.
struct StepTrace {
  NodeId factor;
  NodeId conclusion;
  std::vector<NodeId> premises;
  BeliefUpdate effect;
};

/// Every belief update produced while evaluating an argument.
struct FaTrace {
  std::map<NodeId, BeliefUpdate> node_effects;
  /// In evaluation (topological) order.
  std::vector<StepTrace> steps;
};

/// Evaluates the argument from its sources to every node: each observed
/// node gets Obs(state); each other variable node gets the normalized
/// product of the step effects of its factor predecessors.
FaTrace trace_fa(const FactorGraph& fg, const FactorArgument& fa, const Evidence& evidence);

/// Shared, thread-safe memo of argument effects keyed by canonical encoding.
class EffectCache {
 public:
  std::optional<BeliefUpdate> find(const std::string& key) const;
  void store(const std::string& key, const BeliefUpdate& effect);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, BeliefUpdate> entries_;
};

/// δ_X of the argument. Throws ValidationError when a source is unobserved.
BeliefUpdate fa_effect(const FactorGraph& fg, const FactorArgument& fa, NodeId node,
                       const Evidence& evidence, EffectCache* cache = nullptr);

/// Logodds of `effect` at state `state` (+inf when every other state is 0).
double fa_strength(const BeliefUpdate& effect, std::size_t state);

/// State with the largest |logodds|. Ties prefer a positive logodds, then
/// the lowest index.
std::size_t argued_state(const BeliefUpdate& effect);

/// max_i |logodds of (a/b) at state i|. Throws NumericError where b is 0
/// but a is not.
double fa_distance(const BeliefUpdate& a, const BeliefUpdate& b);

/// Set partitions of {0..n-1} with at least two blocks: all of them for
/// n <= 5, two-block partitions only above that.
std::vector<std::vector<std::vector<std::size_t>>> nontrivial_partitions(std::size_t n);

/// True when the parts must be presented jointly: every nontrivial
/// partition's product of block effects lies at distance >= `dt` from the
/// effect of the full union. Returns false at the first partition closer
/// than `dt`. An undefined distance counts as infinite.
///
/// `allow_block`, when given, skips partitions containing a block (given as
/// part indices) it rejects.
bool check_dependence(const FactorGraph& fg, const std::vector<FactorArgument>& parts, double dt,
                      const Evidence& evidence, EffectCache* cache = nullptr,
                      const std::function<bool(const std::vector<std::size_t>&)>& allow_block = {});

}  // namespace bnexplain
