#include "bnexplain/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

using Message = std::vector<double>;

void normalize_in_place(Message& m) {
  double z = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(z > 0.0)) {
    throw NumericError("message passing produced an all-zero message; the evidence has probability zero");
  }
  for (double& x : m) x /= z;
}

// One undirected factor-graph edge.
struct Edge {
  std::size_t factor;    // CPT owner index
  std::size_t variable;  // variable index
  std::size_t slot;      // position of `variable` in the factor scope
};

class MessageState {
 public:
  MessageState(const FactorGraph& fg, const Evidence& evidence) : fg_(fg) {
    const std::size_t n = fg.num_variables();
    factor_edges_.resize(n);
    variable_edges_.resize(n);
    potentials_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
      const Factor& phi = fg.factor(fg.factor_node(f));
      for (std::size_t k = 0; k < phi.scope().size(); ++k) {
        std::size_t v = *fg.find(phi.scope()[k]->name);
        factor_edges_[f].push_back(edges_.size());
        variable_edges_[v].push_back(edges_.size());
        edges_.push_back({f, v, k});
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t card = fg.variable(v)->cardinality();
      potentials_[v].assign(card, 1.0);
      if (auto s = evidence.state_of(v)) {
        std::fill(potentials_[v].begin(), potentials_[v].end(), 0.0);
        potentials_[v][*s] = 1.0;
      }
    }
    to_factor_.resize(edges_.size());
    to_variable_.resize(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      std::size_t card = fg.variable(edges_[e].variable)->cardinality();
      to_factor_[e].assign(card, 1.0 / static_cast<double>(card));
      to_variable_[e] = to_factor_[e];
    }
  }

  std::size_t num_edges() const { return edges_.size(); }

  Message variable_to_factor(std::size_t e) const {
    const Edge& edge = edges_[e];
    Message m = potentials_[edge.variable];
    for (std::size_t other : variable_edges_[edge.variable]) {
      if (other == e) continue;
      for (std::size_t s = 0; s < m.size(); ++s) m[s] *= to_variable_[other][s];
    }
    normalize_in_place(m);
    return m;
  }

  Message factor_to_variable(std::size_t e) const {
    const Edge& edge = edges_[e];
    const Factor& phi = fg_.factor(fg_.factor_node(edge.factor));
    const auto& scope = phi.scope();
    const auto& incident = factor_edges_[edge.factor];
    Message m(scope[edge.slot]->cardinality(), 0.0);
    std::vector<std::size_t> digits(scope.size(), 0);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      double w = phi[i];
      if (w != 0.0) {
        for (std::size_t k = 0; k < scope.size() && w != 0.0; ++k) {
          if (k == edge.slot) continue;
          w *= to_factor_[incident[k]][digits[k]];
        }
        m[digits[edge.slot]] += w;
      }
      for (std::size_t k = scope.size(); k-- > 0;) {
        if (++digits[k] < scope[k]->cardinality()) break;
        digits[k] = 0;
      }
    }
    normalize_in_place(m);
    return m;
  }

  // Damped replacement; returns the largest entry change.
  static double blend(Message& current, const Message& fresh, double damping) {
    double change = 0.0;
    for (std::size_t s = 0; s < current.size(); ++s) {
      double next = (1.0 - damping) * fresh[s] + damping * current[s];
      change = std::max(change, std::abs(next - current[s]));
      current[s] = next;
    }
    normalize_in_place(current);
    return change;
  }

  double sweep(const LoopyConfig& config, const std::vector<std::size_t>& order) {
    double residual = 0.0;
    if (config.schedule == Schedule::kFlooding) {
      std::vector<Message> fresh_factor(edges_.size()), fresh_variable(edges_.size());
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        fresh_factor[e] = variable_to_factor(e);
        fresh_variable[e] = factor_to_variable(e);
      }
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        residual = std::max(residual, blend(to_factor_[e], fresh_factor[e], config.damping));
        residual = std::max(residual, blend(to_variable_[e], fresh_variable[e], config.damping));
      }
    } else {
      for (std::size_t e : order) {
        residual = std::max(residual, blend(to_factor_[e], variable_to_factor(e), config.damping));
      }
      for (std::size_t e : order) {
        residual = std::max(residual, blend(to_variable_[e], factor_to_variable(e), config.damping));
      }
    }
    return residual;
  }

  Message belief(std::size_t v) const {
    Message m = potentials_[v];
    for (std::size_t e : variable_edges_[v]) {
      for (std::size_t s = 0; s < m.size(); ++s) m[s] *= to_variable_[e][s];
    }
    normalize_in_place(m);
    return m;
  }

 private:
  const FactorGraph& fg_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> factor_edges_;
  std::vector<std::vector<std::size_t>> variable_edges_;
  std::vector<Message> potentials_;
  std::vector<Message> to_factor_;
  std::vector<Message> to_variable_;
};

}  // namespace

LoopyResult loopy_posterior(const FactorGraph& fg, const Evidence& evidence, std::size_t target,
                            const LoopyConfig& config) {
  if (target >= fg.num_variables()) throw ValidationError("target index out of range");
  if (evidence.contains(target)) {
    throw ValidationError("target '" + fg.name(target) + "' is also observed");
  }
  if (!(config.damping >= 0.0 && config.damping < 1.0)) {
    throw ValidationError("damping must lie in [0, 1)");
  }
  MessageState state(fg, evidence);
  std::vector<std::size_t> order(state.num_edges());
  std::iota(order.begin(), order.end(), 0);
  if (config.order_seed) {
    std::mt19937_64 rng(*config.order_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  double residual = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  while (iterations < config.max_iterations) {
    residual = state.sweep(config, order);
    ++iterations;
    if (residual < config.tolerance) break;
  }
  Message m = state.belief(target);
  return LoopyResult{BeliefUpdate(Factor({fg.variable(target)}, std::move(m))),
                     residual < config.tolerance, iterations, residual};
}

LoopyResult prior_marginal(const FactorGraph& fg, std::size_t target, const LoopyConfig& config) {
  return loopy_posterior(fg, Evidence{}, target, config);
}

BeliefUpdate exact_posterior(const BayesianNetwork& bn, const Evidence& evidence, std::size_t target,
                             std::size_t max_variables) {
  if (bn.size() > max_variables) {
    throw CapacityError("exact inference is limited to " + std::to_string(max_variables) +
                        " variables; network has " + std::to_string(bn.size()));
  }
  evidence.check_target(bn, target);

  std::vector<Factor> pool;
  for (std::size_t i = 0; i < bn.size(); ++i) pool.push_back(bn.cpt(i));
  for (const auto& o : evidence.observations()) {
    const auto& v = bn.variable(o.variable);
    pool.push_back(obs(v, v->states[o.state]).factor());
  }

  std::set<std::string> remaining;
  for (std::size_t i = 0; i < bn.size(); ++i) {
    if (i != target) remaining.insert(bn.variable(i)->name);
  }

  while (!remaining.empty()) {
    // min-fill: fewest new interaction edges; ties by name
    std::string best;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (const auto& name : remaining) {
      std::set<std::string> neighbourhood;
      std::set<std::pair<std::string, std::string>> present;
      for (const auto& f : pool) {
        if (!f.contains(name)) continue;
        auto names = f.scope_names();
        for (const auto& a : names) {
          if (a != name) neighbourhood.insert(a);
          for (const auto& b : names) {
            if (a < b) present.emplace(a, b);
          }
        }
      }
      std::size_t fill = 0;
      for (auto a = neighbourhood.begin(); a != neighbourhood.end(); ++a) {
        for (auto b = std::next(a); b != neighbourhood.end(); ++b) {
          if (!present.count({*a, *b})) ++fill;
        }
      }
      if (fill < best_fill) {
        best_fill = fill;
        best = name;
      }
    }
    remaining.erase(best);

    Factor joint;
    std::vector<Factor> rest;
    for (auto& f : pool) {
      if (f.contains(best)) {
        joint = product(joint, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(marginalize(joint, {best}));
    pool = std::move(rest);
  }

  Factor result;
  for (const auto& f : pool) result = product(result, f);
  result = project(result, {bn.variable(target)->name});
  if (!(result.total() > 0.0)) throw NumericError("the evidence has probability zero");
  if (result.scope().empty()) {
    result = Factor::constant({bn.variable(target)}, result[0]);
  }
  return BeliefUpdate(normalize(result));
}

}  // namespace bnexplain
