#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnexplain {

/// A discrete categorical random variable with an ordered list of states.
struct Variable {
  std::string name;
  std::vector<std::string> states;

  std::size_t cardinality() const { return states.size(); }
  std::optional<std::size_t> state_index(std::string_view state) const;

  friend bool operator==(const Variable&, const Variable&) = default;
};

using VariableRef = std::shared_ptr<const Variable>;

/// Builds a shared variable, rejecting fewer than two states or duplicate state names.
VariableRef make_variable(std::string name, std::vector<std::string> states);

/// Nonnegative table over an ordered scope.
///
/// Values are laid out row-major with the last scope variable varying
/// fastest. A factor over the empty scope holds a single scalar.
class Factor {
 public:
  Factor();
  Factor(std::vector<VariableRef> scope, std::vector<double> values);

  static Factor constant(std::vector<VariableRef> scope, double value = 1.0);

  const std::vector<VariableRef>& scope() const { return scope_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Entry for one state index per scope variable, in scope order.
  double at(std::span<const std::size_t> assignment) const;

  std::optional<std::size_t> position(std::string_view name) const;
  bool contains(std::string_view name) const { return position(name).has_value(); }
  std::vector<std::string> scope_names() const;

  double total() const;

  /// Same function with the scope permuted into `names` order.
  Factor reordered(const std::vector<std::string>& names) const;
  /// Scope sorted by variable name; used for order-independent comparison.
  Factor canonical() const;

  /// "A=a, B=b" for a flat index, used in diagnostics.
  std::string describe_index(std::size_t flat) const;

 private:
  std::vector<VariableRef> scope_;
  std::vector<double> values_;
};

Factor product(const Factor& a, const Factor& b);

/// Entrywise quotient. `den`'s scope must be a subset of `num`'s.
/// 0/0 is taken as 0; a positive numerator over zero throws NumericError.
Factor divide(const Factor& num, const Factor& den);

/// Sums out the named variables.
Factor marginalize(const Factor& f, const std::vector<std::string>& out);

/// Sums out everything except the named variables (kept in `f`'s order).
Factor project(const Factor& f, const std::vector<std::string>& keep);

Factor normalize(const Factor& f);

/// Tables equal within `tol` after reordering both scopes by name.
bool approx_equal(const Factor& a, const Factor& b, double tol = 1e-9);

/// Conditional probability table for `child` given `parents`.
///
/// `table` holds one row per parent configuration (last parent fastest),
/// each row listing P(child = s | row) for every child state.
struct Cpt {
  VariableRef child;
  std::vector<VariableRef> parents;
  std::vector<double> table;
};

/// Scope is parents followed by the child; every row must sum to 1 within `tolerance`.
Factor factor_from_cpt(const Cpt& cpt, double tolerance = 1e-6);

/// Single-variable factor with at least one strictly positive entry.
class BeliefUpdate {
 public:
  explicit BeliefUpdate(Factor factor);

  static BeliefUpdate uniform(const VariableRef& variable);

  const Variable& variable() const { return *factor_.scope().front(); }
  const VariableRef& variable_ref() const { return factor_.scope().front(); }
  const Factor& factor() const { return factor_; }
  std::size_t size() const { return factor_.size(); }
  double operator[](std::size_t i) const { return factor_[i]; }

  BeliefUpdate normalized() const;

 private:
  Factor factor_;
};

/// Lopsided update: 1 at `state`, 0 elsewhere.
BeliefUpdate obs(const VariableRef& variable, std::string_view state);

/// ln( u[o] / mean_{i != o} u[i] ). A zero denominator yields +inf
/// (or NaN when the numerator is zero too); a zero numerator yields -inf.
double logodds(const BeliefUpdate& update, std::size_t o);

/// Per-state logodds for every state.
std::vector<double> logodds_all(const BeliefUpdate& update);

}  // namespace bnexplain
