#include "bnexplain/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

std::vector<std::size_t> strides_of(const std::vector<VariableRef>& scope) {
  std::vector<std::size_t> strides(scope.size(), 1);
  for (std::size_t k = scope.size(); k-- > 1;) {
    strides[k - 1] = strides[k] * scope[k]->cardinality();
  }
  return strides;
}

std::size_t table_size(const std::vector<VariableRef>& scope) {
  std::size_t n = 1;
  for (const auto& v : scope) n *= v->cardinality();
  return n;
}

void require_compatible(const Variable& a, const Variable& b) {
  if (a.states != b.states) {
    throw ValidationError("variable '" + a.name + "' has inconsistent state lists across factors");
  }
}

// Walks every assignment of `scope` in canonical order while tracking the
// matching flat offsets into up to two other tables.
class Odometer {
 public:
  Odometer(const std::vector<VariableRef>& scope, std::vector<std::vector<std::size_t>> strides)
      : cards_(scope.size()), digits_(scope.size(), 0), strides_(std::move(strides)),
        offsets_(strides_.size(), 0) {
    for (std::size_t k = 0; k < scope.size(); ++k) cards_[k] = scope[k]->cardinality();
  }

  std::size_t offset(std::size_t table) const { return offsets_[table]; }

  void advance() {
    for (std::size_t k = cards_.size(); k-- > 0;) {
      if (++digits_[k] < cards_[k]) {
        for (std::size_t t = 0; t < strides_.size(); ++t) offsets_[t] += strides_[t][k];
        return;
      }
      digits_[k] = 0;
      for (std::size_t t = 0; t < strides_.size(); ++t) {
        offsets_[t] -= strides_[t][k] * (cards_[k] - 1);
      }
    }
  }

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::size_t> digits_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> offsets_;
};

// Strides of `sub` expressed along the axes of `full` (0 where absent).
std::vector<std::size_t> projected_strides(const std::vector<VariableRef>& full, const Factor& sub) {
  auto sub_strides = strides_of(sub.scope());
  std::vector<std::size_t> out(full.size(), 0);
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (auto pos = sub.position(full[k]->name)) out[k] = sub_strides[*pos];
  }
  return out;
}

}  // namespace

std::optional<std::size_t> Variable::state_index(std::string_view state) const {
  auto it = std::find(states.begin(), states.end(), state);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

VariableRef make_variable(std::string name, std::vector<std::string> states) {
  if (name.empty()) throw ValidationError("variable name must not be empty");
  if (states.size() < 2) {
    throw ValidationError("variable '" + name + "' needs at least two states");
  }
  std::set<std::string> seen;
  for (const auto& s : states) {
    if (!seen.insert(s).second) {
      throw ValidationError("variable '" + name + "' repeats state '" + s + "'");
    }
  }
  return std::make_shared<const Variable>(Variable{std::move(name), std::move(states)});
}

Factor::Factor() : values_{1.0} {}

Factor::Factor(std::vector<VariableRef> scope, std::vector<double> values)
    : scope_(std::move(scope)), values_(std::move(values)) {
  std::set<std::string> names;
  for (const auto& v : scope_) {
    if (!v) throw ValidationError("factor scope holds a null variable");
    if (!names.insert(v->name).second) {
      throw ValidationError("factor scope repeats variable '" + v->name + "'");
    }
  }
  if (values_.size() != table_size(scope_)) {
    throw ValidationError("factor table has " + std::to_string(values_.size()) +
                          " entries, scope requires " + std::to_string(table_size(scope_)));
  }
  for (double x : values_) {
    if (!(x >= 0.0) || std::isinf(x)) {
      throw ValidationError("factor entries must be finite and nonnegative");
    }
  }
}

Factor Factor::constant(std::vector<VariableRef> scope, double value) {
  std::size_t n = table_size(scope);
  return Factor(std::move(scope), std::vector<double>(n, value));
}

double Factor::at(std::span<const std::size_t> assignment) const {
  if (assignment.size() != scope_.size()) throw ValidationError("assignment arity mismatch");
  auto strides = strides_of(scope_);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    if (assignment[k] >= scope_[k]->cardinality()) throw ValidationError("state index out of range");
    flat += assignment[k] * strides[k];
  }
  return values_[flat];
}

std::optional<std::size_t> Factor::position(std::string_view name) const {
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    if (scope_[k]->name == name) return k;
  }
  return std::nullopt;
}

std::vector<std::string> Factor::scope_names() const {
  std::vector<std::string> names;
  names.reserve(scope_.size());
  for (const auto& v : scope_) names.push_back(v->name);
  return names;
}

double Factor::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Factor Factor::reordered(const std::vector<std::string>& names) const {
  if (names.size() != scope_.size()) throw ValidationError("reorder needs a permutation of the scope");
  std::vector<VariableRef> scope;
  scope.reserve(names.size());
  for (const auto& n : names) {
    auto pos = position(n);
    if (!pos) throw ValidationError("variable '" + n + "' is not in the factor scope");
    scope.push_back(scope_[*pos]);
  }
  Odometer walk(scope, {strides_of(scope), projected_strides(scope, *this)});
  std::vector<double> values(values_.size());
  for (std::size_t i = 0; i < values.size(); ++i, walk.advance()) {
    values[walk.offset(0)] = values_[walk.offset(1)];
  }
  return Factor(std::move(scope), std::move(values));
}

Factor Factor::canonical() const {
  auto names = scope_names();
  std::sort(names.begin(), names.end());
  return reordered(names);
}

std::string Factor::describe_index(std::size_t flat) const {
  auto strides = strides_of(scope_);
  std::ostringstream out;
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    if (k) out << ", ";
    std::size_t digit = (flat / strides[k]) % scope_[k]->cardinality();
    out << scope_[k]->name << '=' << scope_[k]->states[digit];
  }
  return out.str();
}

Factor product(const Factor& a, const Factor& b) {
  std::vector<VariableRef> scope = a.scope();
  for (const auto& v : b.scope()) {
    if (auto pos = a.position(v->name)) {
      require_compatible(*a.scope()[*pos], *v);
    } else {
      scope.push_back(v);
    }
  }
  std::size_t n = table_size(scope);
  std::vector<double> values(n);
  Odometer walk(scope, {projected_strides(scope, a), projected_strides(scope, b)});
  for (std::size_t i = 0; i < n; ++i, walk.advance()) {
    values[i] = a[walk.offset(0)] * b[walk.offset(1)];
  }
  return Factor(std::move(scope), std::move(values));
}

Factor divide(const Factor& num, const Factor& den) {
  for (const auto& v : den.scope()) {
    auto pos = num.position(v->name);
    if (!pos) {
      throw ValidationError("divisor variable '" + v->name + "' is not in the dividend scope");
    }
    require_compatible(*num.scope()[*pos], *v);
  }
  const auto& scope = num.scope();
  std::vector<double> values(num.size());
  Odometer walk(scope, {projected_strides(scope, den)});
  for (std::size_t i = 0; i < values.size(); ++i, walk.advance()) {
    double d = den[walk.offset(0)];
    if (d == 0.0) {
      if (num[i] != 0.0) {
        throw NumericError("division of a positive entry by zero at " + num.describe_index(i));
      }
      values[i] = 0.0;
    } else {
      values[i] = num[i] / d;
    }
  }
  return Factor(scope, std::move(values));
}

Factor marginalize(const Factor& f, const std::vector<std::string>& out) {
  for (const auto& name : out) {
    if (!f.contains(name)) {
      throw ValidationError("cannot marginalize '" + name + "': not in the factor scope");
    }
  }
  std::vector<VariableRef> kept;
  for (const auto& v : f.scope()) {
    if (std::find(out.begin(), out.end(), v->name) == out.end()) kept.push_back(v);
  }
  if (kept.size() == f.scope().size()) return f;
  Factor shell = Factor::constant(kept, 0.0);
  std::vector<double> values(shell.size(), 0.0);
  Odometer walk(f.scope(), {projected_strides(f.scope(), shell)});
  for (std::size_t i = 0; i < f.size(); ++i, walk.advance()) {
    values[walk.offset(0)] += f[i];
  }
  return Factor(std::move(kept), std::move(values));
}

Factor project(const Factor& f, const std::vector<std::string>& keep) {
  std::vector<std::string> out;
  for (const auto& v : f.scope()) {
    if (std::find(keep.begin(), keep.end(), v->name) == keep.end()) out.push_back(v->name);
  }
  return marginalize(f, out);
}

Factor normalize(const Factor& f) {
  double z = f.total();
  if (!(z > 0.0)) throw NumericError("cannot normalize a factor with zero total mass");
  std::vector<double> values(f.values().begin(), f.values().end());
  for (double& x : values) x /= z;
  return Factor(f.scope(), std::move(values));
}

bool approx_equal(const Factor& a, const Factor& b, double tol) {
  if (a.scope().size() != b.scope().size()) return false;
  Factor ca = a.canonical();
  Factor cb = b.canonical();
  for (std::size_t k = 0; k < ca.scope().size(); ++k) {
    if (!(*ca.scope()[k] == *cb.scope()[k])) return false;
  }
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (std::abs(ca[i] - cb[i]) > tol) return false;
  }
  return true;
}

Factor factor_from_cpt(const Cpt& cpt, double tolerance) {
  if (!cpt.child) throw ValidationError("CPT has no child variable");
  std::vector<VariableRef> scope = cpt.parents;
  scope.push_back(cpt.child);
  Factor f(scope, cpt.table);
  std::size_t card = cpt.child->cardinality();
  for (std::size_t row = 0; row * card < f.size(); ++row) {
    double sum = 0.0;
    for (std::size_t s = 0; s < card; ++s) sum += f[row * card + s];
    if (std::abs(sum - 1.0) > tolerance) {
      std::string config = cpt.parents.empty() ? std::string("(no parents)")
                                               : f.describe_index(row * card);
      if (!cpt.parents.empty()) {
        // drop the trailing child assignment from the description
        config = config.substr(0, config.rfind(", "));
      }
      std::ostringstream msg;
      msg << "CPT of '" << cpt.child->name << "' row " << config << " sums to " << sum;
      throw ValidationError(msg.str());
    }
  }
  return f;
}

BeliefUpdate::BeliefUpdate(Factor factor) : factor_(std::move(factor)) {
  if (factor_.scope().size() != 1) {
    throw ValidationError("a belief update must range over exactly one variable");
  }
  if (!(factor_.total() > 0.0)) {
    throw NumericError("belief update on '" + factor_.scope().front()->name + "' has no positive entry");
  }
}

BeliefUpdate BeliefUpdate::uniform(const VariableRef& variable) {
  return BeliefUpdate(Factor::constant({variable}, 1.0 / static_cast<double>(variable->cardinality())));
}

BeliefUpdate BeliefUpdate::normalized() const { return BeliefUpdate(normalize(factor_)); }

BeliefUpdate obs(const VariableRef& variable, std::string_view state) {
  auto idx = variable->state_index(state);
  if (!idx) {
    throw ValidationError("variable '" + variable->name + "' has no state '" + std::string(state) + "'");
  }
  std::vector<double> values(variable->cardinality(), 0.0);
  values[*idx] = 1.0;
  return BeliefUpdate(Factor({variable}, std::move(values)));
}

double logodds(const BeliefUpdate& update, std::size_t o) {
  const std::size_t n = update.size();
  if (o >= n) throw ValidationError("state index out of range for logodds");
  double rest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != o) rest += update[i];
  }
  rest /= static_cast<double>(n - 1);
  double own = update[o];
  if (rest == 0.0) {
    return own > 0.0 ? std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::quiet_NaN();
  }
  if (own == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(own / rest);
}

std::vector<double> logodds_all(const BeliefUpdate& update) {
  std::vector<double> out(update.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logodds(update, i);
  return out;
}

}  // namespace bnexplain
