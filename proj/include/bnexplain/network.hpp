#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bnexplain/factor.hpp"

namespace bnexplain {

/// Discrete Bayesian network: variables, a DAG over them and one CPT each.
///
/// Immutable after construction. Variable order is the declaration order
/// of the source document; every CPT factor has scope parents + child.
class BayesianNetwork {
 public:
  BayesianNetwork(std::string name, std::vector<VariableRef> variables, std::vector<Cpt> cpts);

  const std::string& name() const { return name_; }
  std::size_t size() const { return variables_.size(); }

  const std::vector<VariableRef>& variables() const { return variables_; }
  const VariableRef& variable(std::size_t i) const { return variables_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of but throws ValidationError naming the missing variable.
  std::size_t require_index(std::string_view name) const;

  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  const Factor& cpt(std::size_t i) const { return cpts_.at(i); }

  /// (parent, child) pairs in CPT declaration order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::vector<std::size_t> topological_order() const { return topo_; }

  friend bool operator==(const BayesianNetwork& a, const BayesianNetwork& b);

 private:
  std::string name_;
  std::vector<VariableRef> variables_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<Factor> cpts_;
  std::vector<std::size_t> topo_;
};

/// One observed variable.
struct Observation {
  std::size_t variable;
  std::size_t state;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Observed states, kept in the order they were entered.
class Evidence {
 public:
  Evidence() = default;

  /// Parses "Name=state" style pairs against `bn`.
  static Evidence from_names(const BayesianNetwork& bn,
                             const std::vector<std::pair<std::string, std::string>>& pairs);

  void add(const BayesianNetwork& bn, std::size_t variable, std::size_t state);
  void add(const BayesianNetwork& bn, std::string_view variable, std::string_view state);

  const std::vector<Observation>& observations() const { return observations_; }
  bool empty() const { return observations_.empty(); }
  std::size_t size() const { return observations_.size(); }
  bool contains(std::size_t variable) const { return state_of(variable).has_value(); }
  std::optional<std::size_t> state_of(std::size_t variable) const;

  /// Rejects a target that is itself observed.
  void check_target(const BayesianNetwork& bn, std::size_t target) const;

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::vector<Observation> observations_;
};

/// Active-trail test: true when every variable in `sources` is d-separated
/// from `target` given `given`.
bool d_separated(const BayesianNetwork& bn, const std::vector<std::size_t>& sources,
                 std::size_t target, const std::vector<std::size_t>& given);

}  // namespace bnexplain
