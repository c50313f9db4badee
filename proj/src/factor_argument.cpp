#include "bnexplain/factor_argument.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

std::vector<NodeId> collect_nodes(const std::vector<FaEdge>& edges) {
  std::set<NodeId> nodes;
  for (const auto& e : edges) {
    nodes.insert(e.from);
    nodes.insert(e.to);
  }
  return {nodes.begin(), nodes.end()};
}

bool acyclic(const std::vector<FaEdge>& edges, const std::vector<NodeId>& nodes) {
  std::map<NodeId, std::size_t> indegree;
  for (NodeId n : nodes) indegree[n] = 0;
  for (const auto& e : edges) ++indegree[e.to];
  std::vector<NodeId> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    NodeId n = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& e : edges) {
      if (e.from == n && --indegree[e.to] == 0) ready.push_back(e.to);
    }
  }
  return seen == nodes.size();
}

void normalize_edges(std::vector<FaEdge>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

}  // namespace

FactorArgument::FactorArgument(const FactorGraph& fg, std::vector<FaEdge> edges, NodeId target)
    : edges_(std::move(edges)), target_(target) {
  normalize_edges(edges_);
  if (edges_.empty()) throw ValidationError("a factor argument needs at least one edge");
  nodes_ = collect_nodes(edges_);
  for (const auto& e : edges_) {
    if (e.from >= fg.num_nodes() || e.to >= fg.num_nodes() || !fg.adjacent(e.from, e.to)) {
      throw ValidationError("factor argument edge is not an edge of the factor graph");
    }
    if (fg.is_variable(e.from) == fg.is_variable(e.to)) {
      throw ValidationError("factor argument edges must alternate variable and factor nodes");
    }
  }
  if (!contains(target_) || !fg.is_variable(target_)) {
    throw ValidationError("factor argument target must be one of its variable nodes");
  }
  for (NodeId n : nodes_) {
    if (successors(n).empty() && n != target_) {
      throw ValidationError("factor argument has a second sink '" + fg.name(n) + "'");
    }
    if (predecessors(n).empty() && !fg.is_variable(n)) {
      throw ValidationError("factor argument source '" + fg.name(n) + "' is a factor node");
    }
  }
  if (!successors(target_).empty()) throw ValidationError("factor argument target must be a sink");
  if (!acyclic(edges_, nodes_)) throw ValidationError("factor argument contains a directed cycle");
}

FactorArgument FactorArgument::from_path(const FactorGraph& fg, const Path& path) {
  if (path.size() < 3) throw ValidationError("a path argument needs at least one factor step");
  std::vector<FaEdge> edges;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) edges.push_back({path[i], path[i + 1]});
  return FactorArgument(fg, std::move(edges), path.back());
}

std::vector<NodeId> FactorArgument::sources() const {
  std::vector<NodeId> out;
  for (NodeId n : nodes_) {
    if (predecessors(n).empty()) out.push_back(n);
  }
  return out;
}

bool FactorArgument::contains(NodeId n) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

std::vector<NodeId> FactorArgument::predecessors(NodeId n) const {
  if (!contains(n)) throw ValidationError("node is not part of the factor argument");
  std::vector<NodeId> out;
  for (const auto& e : edges_) {
    if (e.to == n) out.push_back(e.from);
  }
  return out;
}

std::vector<NodeId> FactorArgument::successors(NodeId n) const {
  if (!contains(n)) throw ValidationError("node is not part of the factor argument");
  std::vector<NodeId> out;
  for (const auto& e : edges_) {
    if (e.from == n) out.push_back(e.to);
  }
  return out;
}

std::vector<NodeId> FactorArgument::topological_order(const FactorGraph& fg) const {
  std::map<NodeId, std::size_t> indegree;
  for (NodeId n : nodes_) indegree[n] = 0;
  for (const auto& e : edges_) ++indegree[e.to];
  auto by_name = [&](NodeId a, NodeId b) { return fg.name(a) < fg.name(b); };
  std::set<NodeId, decltype(by_name)> ready(by_name);
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.insert(n);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& e : edges_) {
      if (e.from == n && --indegree[e.to] == 0) ready.insert(e.to);
    }
  }
  return order;
}

std::string FactorArgument::encoding(const FactorGraph& fg) const {
  std::vector<std::string> parts;
  parts.reserve(edges_.size());
  for (const auto& e : edges_) parts.push_back(fg.name(e.from) + "→" + fg.name(e.to));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ';';
    out += parts[i];
  }
  return out;
}

bool FactorArgument::is_subgraph_of(const FactorArgument& other) const {
  return std::includes(other.nodes_.begin(), other.nodes_.end(), nodes_.begin(), nodes_.end()) &&
         std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
}

std::size_t FactorArgument::length(const FactorGraph& fg) const {
  // longest path in variable hops, by dynamic programming over a topological order
  std::map<NodeId, std::size_t> best;
  for (NodeId n : topological_order(fg)) {
    std::size_t here = 0;
    for (NodeId p : predecessors(n)) here = std::max(here, best[p] + (fg.is_variable(n) ? 1 : 0));
    best[n] = here;
  }
  return best[target_];
}

std::optional<FactorArgument> try_compose(const FactorGraph& fg, const std::vector<FactorArgument>& parts) {
  if (parts.empty()) throw ValidationError("cannot compose an empty set of arguments");
  FactorArgument out;
  out.target_ = parts.front().target();
  for (const auto& p : parts) {
    if (p.target() != out.target_) {
      throw ValidationError("composed arguments must share a target; found '" + fg.name(out.target_) +
                            "' and '" + fg.name(p.target()) + "'");
    }
    out.edges_.insert(out.edges_.end(), p.edges().begin(), p.edges().end());
  }
  normalize_edges(out.edges_);
  out.nodes_ = collect_nodes(out.edges_);
  if (!acyclic(out.edges_, out.nodes_)) return std::nullopt;
  return out;
}

FactorArgument compose_fas(const FactorGraph& fg, const std::vector<FactorArgument>& parts) {
  auto out = try_compose(fg, parts);
  if (!out) throw ValidationError("the union of these arguments contains a directed cycle");
  return *out;
}

BeliefUpdate step_effect(const Factor& phi, const std::vector<BeliefUpdate>& premises,
                         const VariableRef& successor) {
  if (!phi.contains(successor->name)) {
    throw ValidationError("step successor '" + successor->name + "' is not in the factor scope");
  }
  Factor num = phi;
  for (const auto& p : premises) {
    if (!phi.contains(p.variable().name)) {
      throw ValidationError("premise '" + p.variable().name + "' is not in the factor scope");
    }
    if (p.variable().name == successor->name) {
      throw ValidationError("a step cannot take its own successor as a premise");
    }
    num = product(num, p.factor());
  }
  num = project(normalize(num), {successor->name});
  Factor den = normalize(project(phi, {successor->name}));
  Factor ratio;
  try {
    ratio = divide(num, den);
  } catch (const NumericError&) {
    for (std::size_t s = 0; s < den.size(); ++s) {
      if (den[s] == 0.0 && num[s] > 0.0) {
        throw NumericError("step effect on '" + successor->name + "' divides by zero at state '" +
                           successor->states[s] + "'");
      }
    }
    throw;
  }
  return BeliefUpdate(normalize(ratio));
}

FaTrace trace_fa(const FactorGraph& fg, const FactorArgument& fa, const Evidence& evidence) {
  FaTrace trace;
  for (NodeId n : fa.topological_order(fg)) {
    if (!fg.is_variable(n)) continue;
    const auto& var = fg.variable(n);
    if (auto s = evidence.state_of(fg.variable_of(n))) {
      trace.node_effects.emplace(n, obs(var, var->states[*s]));
      continue;
    }
    auto incoming = fa.predecessors(n);
    if (incoming.empty()) {
      throw ValidationError("argument source '" + fg.name(n) + "' is not observed");
    }
    Factor joint;
    for (NodeId phi : incoming) {
      StepTrace step{phi, n, fa.predecessors(phi), BeliefUpdate::uniform(var)};
      std::vector<BeliefUpdate> premises;
      for (NodeId y : step.premises) premises.push_back(trace.node_effects.at(y));
      step.effect = step_effect(fg.factor(phi), premises, var);
      joint = product(joint, step.effect.factor());
      trace.steps.push_back(std::move(step));
    }
    trace.node_effects.emplace(n, BeliefUpdate(normalize(joint)));
  }
  return trace;
}

std::optional<BeliefUpdate> EffectCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EffectCache::store(const std::string& key, const BeliefUpdate& effect) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key, effect);
}

std::size_t EffectCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

BeliefUpdate fa_effect(const FactorGraph& fg, const FactorArgument& fa, NodeId node,
                       const Evidence& evidence, EffectCache* cache) {
  if (!fa.contains(node)) throw ValidationError("node is not part of the factor argument");
  std::string key;
  if (cache) {
    key = fa.encoding(fg) + "@" + fg.name(node);
    if (auto hit = cache->find(key)) return *hit;
  }
  FaTrace trace = trace_fa(fg, fa, evidence);
  BeliefUpdate out = trace.node_effects.at(node);
  if (cache) cache->store(key, out);
  return out;
}

double fa_strength(const BeliefUpdate& effect, std::size_t state) { return logodds(effect, state); }

std::size_t argued_state(const BeliefUpdate& effect) {
  std::size_t best = 0;
  double best_mag = -1.0;
  bool best_positive = false;
  for (std::size_t i = 0; i < effect.size(); ++i) {
    double lo = logodds(effect, i);
    if (std::isnan(lo)) continue;
    double mag = std::abs(lo);
    if (mag > best_mag || (mag == best_mag && lo > 0.0 && !best_positive)) {
      best_mag = mag;
      best = i;
      best_positive = lo > 0.0;
    }
  }
  return best;
}

double fa_distance(const BeliefUpdate& a, const BeliefUpdate& b) {
  if (a.variable().name != b.variable().name || a.size() != b.size()) {
    throw ValidationError("distance needs two updates on the same variable");
  }
  const std::size_t n = a.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (b[i] == 0.0) {
      if (a[i] != 0.0) {
        throw NumericError("distance ratio undefined at state '" + a.variable().states[i] + "'");
      }
      r[i] = 0.0;
    } else {
      r[i] = a[i] / b[i];
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double rest = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) rest += r[j];
    }
    rest /= static_cast<double>(n - 1);
    double term;
    if (r[i] == 0.0 && rest == 0.0) {
      continue;
    } else if (rest == 0.0 || r[i] == 0.0) {
      term = std::numeric_limits<double>::infinity();
    } else {
      term = std::abs(std::log(r[i] / rest));
    }
    worst = std::max(worst, term);
  }
  return worst;
}

std::vector<std::vector<std::vector<std::size_t>>> nontrivial_partitions(std::size_t n) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  if (n < 2) return out;
  if (n > 5) {
    // two blocks; element 0 always in the first block
    for (std::size_t mask = 1; mask < (std::size_t{1} << (n - 1)); ++mask) {
      std::vector<std::vector<std::size_t>> blocks(2);
      blocks[0].push_back(0);
      for (std::size_t i = 1; i < n; ++i) blocks[(mask >> (i - 1)) & 1].push_back(i);
      out.push_back(std::move(blocks));
    }
    return out;
  }
  // restricted growth strings
  std::vector<std::size_t> label(n, 0);
  while (true) {
    std::size_t blocks = *std::max_element(label.begin(), label.end()) + 1;
    if (blocks >= 2) {
      std::vector<std::vector<std::size_t>> partition(blocks);
      for (std::size_t i = 0; i < n; ++i) partition[label[i]].push_back(i);
      out.push_back(std::move(partition));
    }
    std::size_t i = n;
    while (i-- > 1) {
      std::size_t prefix_max = *std::max_element(label.begin(), label.begin() + i);
      if (label[i] <= prefix_max) {
        ++label[i];
        std::fill(label.begin() + i + 1, label.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

bool check_dependence(const FactorGraph& fg, const std::vector<FactorArgument>& parts, double dt,
                      const Evidence& evidence, EffectCache* cache,
                      const std::function<bool(const std::vector<std::size_t>&)>& allow_block) {
  if (parts.size() < 2) throw ValidationError("dependence is defined for two or more arguments");
  if (!(dt > 0.0)) throw ValidationError("dependence threshold must be positive");
  FactorArgument whole = compose_fas(fg, parts);
  const NodeId target = whole.target();
  BeliefUpdate whole_effect = fa_effect(fg, whole, target, evidence, cache);

  for (const auto& partition : nontrivial_partitions(parts.size())) {
    if (allow_block &&
        !std::all_of(partition.begin(), partition.end(), [&](const auto& b) { return allow_block(b); })) {
      continue;
    }
    Factor combined;
    for (const auto& block : partition) {
      std::vector<FactorArgument> members;
      for (std::size_t i : block) members.push_back(parts[i]);
      FactorArgument block_fa = compose_fas(fg, members);
      combined = product(combined, fa_effect(fg, block_fa, target, evidence, cache).factor());
    }
    double distance;
    try {
      distance = fa_distance(whole_effect, BeliefUpdate(normalize(combined)));
    } catch (const NumericError&) {
      distance = std::numeric_limits<double>::infinity();
    }
    if (distance < dt) return false;
  }
  return true;
}

}  // namespace bnexplain
