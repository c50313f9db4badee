#include "bnexplain/factor_graph.hpp"

#include <algorithm>

#include "bnexplain/errors.hpp"

namespace bnexplain {

FactorGraph::FactorGraph(const BayesianNetwork& bn)
    : num_variables_(bn.size()), names_(2 * bn.size()), adjacency_(2 * bn.size()) {
  for (std::size_t i = 0; i < bn.size(); ++i) {
    names_[i] = bn.variable(i)->name;
    names_[num_variables_ + i] = "phi(" + bn.variable(i)->name + ")";
    factors_.push_back(bn.cpt(i));
    variables_.push_back(bn.variable(i));
  }
  for (std::size_t i = 0; i < bn.size(); ++i) {
    NodeId f = factor_node(i);
    for (const auto& v : bn.cpt(i).scope()) {
      NodeId x = variable_node(bn.require_index(v->name));
      adjacency_[f].push_back(x);
      adjacency_[x].push_back(f);
      ++num_edges_;
    }
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(), [&](NodeId a, NodeId b) { return names_[a] < names_[b]; });
  }
}

std::optional<NodeId> FactorGraph::find(std::string_view name) const {
  for (NodeId n = 0; n < names_.size(); ++n) {
    if (names_[n] == name) return n;
  }
  return std::nullopt;
}

bool FactorGraph::adjacent(NodeId a, NodeId b) const {
  const auto& adj = adjacency_.at(a);
  return std::find(adj.begin(), adj.end(), b) != adj.end();
}

FactorGraph build_factor_graph(const BayesianNetwork& bn) { return FactorGraph(bn); }

namespace {

struct PathSearch {
  const FactorGraph& fg;
  NodeId to;
  std::size_t max_length;
  const std::set<NodeId>& blocked;
  std::vector<bool> on_path;
  Path current;
  std::vector<Path> found;

  void extend(NodeId node, std::size_t hops) {
    for (NodeId next : fg.neighbors(node)) {
      if (on_path[next]) continue;
      std::size_t next_hops = hops + (fg.is_variable(next) ? 1 : 0);
      if (next_hops > max_length) continue;
      if (next == to) {
        current.push_back(next);
        found.push_back(current);
        current.pop_back();
        continue;
      }
      if (blocked.count(next)) continue;
      on_path[next] = true;
      current.push_back(next);
      extend(next, next_hops);
      current.pop_back();
      on_path[next] = false;
    }
  }
};

}  // namespace

std::vector<Path> simple_paths(const FactorGraph& fg, NodeId from, NodeId to,
                               std::size_t max_length, const std::set<NodeId>& blocked) {
  if (!fg.is_variable(from) || !fg.is_variable(to)) {
    throw ValidationError("simple paths run between variable nodes");
  }
  if (from == to) throw ValidationError("simple path endpoints must differ");
  PathSearch search{fg, to, max_length, blocked, std::vector<bool>(fg.num_nodes(), false), {}, {}};
  search.on_path[from] = true;
  search.current.push_back(from);
  search.extend(from, 0);
  return std::move(search.found);
}

}  // namespace bnexplain
