#include "bnexplain/network.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <set>

#include "bnexplain/errors.hpp"

namespace bnexplain {

BayesianNetwork::BayesianNetwork(std::string name, std::vector<VariableRef> variables,
                                 std::vector<Cpt> cpts)
    : name_(std::move(name)), variables_(std::move(variables)) {
  const std::size_t n = variables_.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i) {
    if (!index.emplace(variables_[i]->name, i).second) {
      throw ValidationError("variable '" + variables_[i]->name + "' is declared twice");
    }
  }

  std::vector<const Cpt*> by_child(n, nullptr);
  for (const auto& cpt : cpts) {
    auto it = index.find(cpt.child->name);
    if (it == index.end()) {
      throw ValidationError("probability block for unknown variable '" + cpt.child->name + "'");
    }
    if (by_child[it->second]) {
      throw ValidationError("variable '" + cpt.child->name + "' has more than one probability block");
    }
    by_child[it->second] = &cpt;
  }

  parents_.assign(n, {});
  children_.assign(n, {});
  cpts_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!by_child[i]) {
      throw ValidationError("variable '" + variables_[i]->name + "' has no probability block");
    }
    Cpt cpt = *by_child[i];
    cpt.child = variables_[i];
    for (auto& p : cpt.parents) {
      auto it = index.find(p->name);
      if (it == index.end()) {
        throw ValidationError("probability block '" + variables_[i]->name +
                              "' names unknown parent '" + p->name + "'");
      }
      if (it->second == i) {
        throw ValidationError("variable '" + variables_[i]->name + "' lists itself as a parent");
      }
      if (std::find(parents_[i].begin(), parents_[i].end(), it->second) != parents_[i].end()) {
        throw ValidationError("probability block '" + variables_[i]->name + "' repeats parent '" +
                              p->name + "'");
      }
      p = variables_[it->second];
      parents_[i].push_back(it->second);
      children_[it->second].push_back(i);
    }
    cpts_.push_back(factor_from_cpt(cpt));
  }

  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = parents_[i].size();
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (std::size_t c : children_[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (topo_.size() != n) {
    std::string culprit;
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] > 0) {
        culprit = variables_[i]->name;
        break;
      }
    }
    throw ValidationError("network has a directed cycle through '" + culprit + "'");
  }
}

std::optional<std::size_t> BayesianNetwork::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i]->name == name) return i;
  }
  return std::nullopt;
}

std::size_t BayesianNetwork::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw ValidationError("unknown variable '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::pair<std::size_t, std::size_t>> BayesianNetwork::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < size(); ++c) {
    for (std::size_t p : parents_[c]) out.emplace_back(p, c);
  }
  return out;
}

bool operator==(const BayesianNetwork& a, const BayesianNetwork& b) {
  if (a.size() != b.size() || a.parents_ != b.parents_) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(*a.variables_[i] == *b.variables_[i])) return false;
    const auto& fa = a.cpts_[i].values();
    const auto& fb = b.cpts_[i].values();
    if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) return false;
  }
  return true;
}

Evidence Evidence::from_names(const BayesianNetwork& bn,
                              const std::vector<std::pair<std::string, std::string>>& pairs) {
  Evidence ev;
  for (const auto& [var, state] : pairs) ev.add(bn, var, state);
  return ev;
}

void Evidence::add(const BayesianNetwork& bn, std::size_t variable, std::size_t state) {
  if (variable >= bn.size()) throw ValidationError("evidence variable index out of range");
  const auto& v = bn.variable(variable);
  if (state >= v->cardinality()) {
    throw ValidationError("evidence state index out of range for '" + v->name + "'");
  }
  if (contains(variable)) {
    throw ValidationError("variable '" + v->name + "' is observed twice");
  }
  observations_.push_back({variable, state});
}

void Evidence::add(const BayesianNetwork& bn, std::string_view variable, std::string_view state) {
  std::size_t idx = bn.require_index(variable);
  auto s = bn.variable(idx)->state_index(state);
  if (!s) {
    throw ValidationError("variable '" + std::string(variable) + "' has no state '" +
                          std::string(state) + "'");
  }
  add(bn, idx, *s);
}

std::optional<std::size_t> Evidence::state_of(std::size_t variable) const {
  for (const auto& o : observations_) {
    if (o.variable == variable) return o.state;
  }
  return std::nullopt;
}

void Evidence::check_target(const BayesianNetwork& bn, std::size_t target) const {
  if (target >= bn.size()) throw ValidationError("target index out of range");
  if (contains(target)) {
    throw ValidationError("target '" + bn.variable(target)->name + "' is also observed");
  }
}

bool d_separated(const BayesianNetwork& bn, const std::vector<std::size_t>& sources,
                 std::size_t target, const std::vector<std::size_t>& given) {
  const std::size_t n = bn.size();
  std::vector<bool> observed(n, false);
  for (std::size_t z : given) observed.at(z) = true;

  // observed variables and their ancestors: colliders there are open
  std::vector<bool> opens_collider(n, false);
  std::deque<std::size_t> pending(given.begin(), given.end());
  while (!pending.empty()) {
    std::size_t v = pending.front();
    pending.pop_front();
    if (opens_collider[v]) continue;
    opens_collider[v] = true;
    for (std::size_t p : bn.parents(v)) pending.push_back(p);
  }

  enum Direction { kFromChild = 0, kFromParent = 1 };
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, Direction>> frontier;
  for (std::size_t s : sources) frontier.emplace_back(s, kFromChild);

  while (!frontier.empty()) {
    auto [v, dir] = frontier.front();
    frontier.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    if (!observed[v] && v == target) return false;

    if (dir == kFromChild) {
      if (observed[v]) continue;
      for (std::size_t p : bn.parents(v)) frontier.emplace_back(p, kFromChild);
      for (std::size_t c : bn.children(v)) frontier.emplace_back(c, kFromParent);
    } else {
      if (!observed[v]) {
        for (std::size_t c : bn.children(v)) frontier.emplace_back(c, kFromParent);
      }
      if (opens_collider[v]) {
        for (std::size_t p : bn.parents(v)) frontier.emplace_back(p, kFromChild);
      }
    }
  }
  return true;
}

}  // namespace bnexplain
