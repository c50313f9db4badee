#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bnexplain/network.hpp"

namespace bnexplain {

/// Node of a factor graph. For a network with V variables, ids [0, V) are
/// variable nodes and ids [V, 2V) are factor nodes; factor node V + i holds
/// the CPT of variable i.
using NodeId = std::size_t;

using Path = std::vector<NodeId>;

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Bipartite variable/factor graph of a Bayesian network.
class FactorGraph {
 public:
  explicit FactorGraph(const BayesianNetwork& bn);

  std::size_t num_variables() const { return num_variables_; }
  std::size_t num_nodes() const { return 2 * num_variables_; }
  std::size_t num_edges() const { return num_edges_; }

  bool is_variable(NodeId n) const { return n < num_variables_; }
  bool is_factor(NodeId n) const { return n >= num_variables_ && n < num_nodes(); }

  NodeId variable_node(std::size_t variable) const { return variable; }
  NodeId factor_node(std::size_t variable) const { return num_variables_ + variable; }
  /// Variable index of a variable node, or the CPT owner of a factor node.
  std::size_t variable_of(NodeId n) const { return is_variable(n) ? n : n - num_variables_; }

  /// Variable name, or "phi(<name>)" for factor nodes.
  const std::string& name(NodeId n) const { return names_.at(n); }
  std::optional<NodeId> find(std::string_view name) const;

  /// Neighbours sorted by node name.
  const std::vector<NodeId>& neighbors(NodeId n) const { return adjacency_.at(n); }
  bool adjacent(NodeId a, NodeId b) const;

  const Factor& factor(NodeId n) const { return factors_.at(variable_of(n)); }
  const VariableRef& variable(NodeId n) const { return variables_.at(variable_of(n)); }

 private:
  std::size_t num_variables_;
  std::size_t num_edges_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Factor> factors_;
  std::vector<VariableRef> variables_;
};

FactorGraph build_factor_graph(const BayesianNetwork& bn);

/// All simple paths `from` → `to` alternating variable and factor nodes.
///
/// Length counts variable-node hops (a path through k variable nodes has
/// length k - 1); paths longer than `max_length` are dropped. Nodes in
/// `blocked` may not appear strictly inside a path. Neighbours are expanded
/// in name order, so the output order is deterministic.
std::vector<Path> simple_paths(const FactorGraph& fg, NodeId from, NodeId to,
                               std::size_t max_length = kUnbounded,
                               const std::set<NodeId>& blocked = {});

}  // namespace bnexplain
