#pragma once

// Brute-force oracles and fixtures shared by the test binaries. Nothing here
// calls the library's factor algebra; tables are indexed by hand.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bnexplain/argument_search.hpp"
#include "bnexplain/bif.hpp"
#include "bnexplain/factor.hpp"
#include "bnexplain/factor_argument.hpp"
#include "bnexplain/factor_graph.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain::testing {

inline std::filesystem::path data_dir() { return BNEXPLAIN_DATA_DIR; }
inline BayesianNetwork network(const std::string& name) {
  return load_bif_file(data_dir() / "networks" / (name + ".bif"));
}
inline BayesianNetwork fixture(const std::string& name) {
  return load_bif_file(data_dir() / "fixtures" / (name + ".bif"));
}

using Assignment = std::map<std::string, std::size_t>;

// Value of `f` at a named assignment, indexed row-major with the last
// scope variable fastest.
inline double value_at(const Factor& f, const Assignment& a) {
  std::size_t flat = 0;
  for (const auto& v : f.scope()) flat = flat * v->cardinality() + a.at(v->name);
  return f[flat];
}

// Every joint assignment of `vars`.
inline std::vector<Assignment> assignments(const std::vector<VariableRef>& vars) {
  std::vector<Assignment> out{Assignment{}};
  for (const auto& v : vars) {
    std::vector<Assignment> next;
    for (const auto& a : out) {
      for (std::size_t s = 0; s < v->cardinality(); ++s) {
        Assignment b = a;
        b[v->name] = s;
        next.push_back(std::move(b));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline std::vector<VariableRef> union_scope(const std::vector<VariableRef>& a, const std::vector<VariableRef>& b) {
  std::vector<VariableRef> out = a;
  for (const auto& v : b) {
    if (std::none_of(out.begin(), out.end(), [&](const VariableRef& w) { return w->name == v->name; })) {
      out.push_back(v);
    }
  }
  return out;
}

// Builds a factor over `scope` by evaluating `fn` at every assignment.
inline Factor tabulate(const std::vector<VariableRef>& scope, const std::function<double(const Assignment&)>& fn) {
  std::vector<double> values;
  for (const auto& a : assignments(scope)) values.push_back(fn(a));
  return Factor(scope, values);
}

inline std::vector<VariableRef> binary_variables(std::size_t n, const std::string& prefix = "X") {
  std::vector<VariableRef> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_variable(prefix + std::to_string(i), {"s0", "s1"}));
  return out;
}

// Random DAG over n binary variables in index order; each node draws up to
// `max_parents` parents from earlier nodes. Rows are random points of the
// simplex; a few entries are exactly zero when `zeros` is set.
inline BayesianNetwork random_network(std::mt19937_64& rng, std::size_t n, std::size_t max_parents = 2,
                                      bool zeros = false) {
  auto vars = binary_variables(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> pool(i);
    for (std::size_t j = 0; j < i; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, std::min(max_parents, i))(rng);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    Cpt cpt;
    cpt.child = vars[i];
    for (std::size_t p : pool) cpt.parents.push_back(vars[p]);
    for (std::size_t row = 0; row < (std::size_t{1} << k); ++row) {
      double p = 0.05 + 0.9 * unit(rng);
      if (zeros && unit(rng) < 0.1) p = unit(rng) < 0.5 ? 0.0 : 1.0;
      cpt.table.push_back(p);
      cpt.table.push_back(1.0 - p);
    }
    cpts.push_back(std::move(cpt));
  }
  return BayesianNetwork("random", vars, cpts);
}

// P(target | evidence) by summing the full joint table.
inline std::vector<double> joint_posterior(const BayesianNetwork& bn, const Evidence& evidence, std::size_t target) {
  std::vector<double> out(bn.variable(target)->cardinality(), 0.0);
  for (const auto& a : assignments(bn.variables())) {
    bool consistent = true;
    for (const auto& o : evidence.observations()) {
      if (a.at(bn.variable(o.variable)->name) != o.state) consistent = false;
    }
    if (!consistent) continue;
    double p = 1.0;
    for (std::size_t i = 0; i < bn.size(); ++i) p *= value_at(bn.cpt(i), a);
    out[a.at(bn.variable(target)->name)] += p;
  }
  double z = 0.0;
  for (double v : out) z += v;
  for (double& v : out) v /= z;
  return out;
}

inline std::vector<double> normalized(std::vector<double> v) {
  double z = 0.0;
  for (double x : v) z += x;
  for (double& x : v) x /= z;
  return v;
}

// Step effect by explicit summation over the factor's assignments.
inline std::vector<double> reference_step(const Factor& phi, const std::map<std::string, std::vector<double>>& premises,
                                          const std::string& successor) {
  std::size_t card = 0;
  for (const auto& v : phi.scope()) {
    if (v->name == successor) card = v->cardinality();
  }
  std::vector<double> num(card, 0.0), den(card, 0.0);
  const auto all = assignments(phi.scope());
  double num_total = 0.0;
  for (const auto& a : all) {
    double w = value_at(phi, a);
    for (const auto& [name, belief] : premises) w *= belief[a.at(name)];
    num_total += w;
  }
  for (const auto& a : all) {
    double w = value_at(phi, a);
    den[a.at(successor)] += w;
    for (const auto& [name, belief] : premises) w *= belief[a.at(name)];
    num[a.at(successor)] += w / num_total;
  }
  den = normalized(den);
  std::vector<double> ratio(card);
  for (std::size_t s = 0; s < card; ++s) ratio[s] = den[s] == 0.0 ? 0.0 : num[s] / den[s];
  return normalized(ratio);
}

// Argument effect on `node` by direct recursion over predecessors.
inline std::vector<double> reference_effect(const FactorGraph& fg, const FactorArgument& fa, NodeId node,
                                            const Evidence& evidence) {
  const auto& var = fg.variable(node);
  if (auto s = evidence.state_of(fg.variable_of(node))) {
    std::vector<double> out(var->cardinality(), 0.0);
    out[*s] = 1.0;
    return out;
  }
  std::vector<double> acc(var->cardinality(), 1.0);
  for (NodeId phi : fa.predecessors(node)) {
    std::map<std::string, std::vector<double>> premises;
    for (NodeId y : fa.predecessors(phi)) premises[fg.name(y)] = reference_effect(fg, fa, y, evidence);
    auto se = reference_step(fg.factor(phi), premises, var->name);
    for (std::size_t s = 0; s < acc.size(); ++s) acc[s] *= se[s];
  }
  return normalized(acc);
}

// Logodds of `v` at state o, from the definition.
inline double reference_logodds(const std::vector<double>& v, std::size_t o) {
  double rest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != o) rest += v[i];
  }
  rest /= static_cast<double>(v.size() - 1);
  return std::log(v[o] / rest);
}

// All set partitions of {0..n-1} into at least two blocks.
inline void all_partitions(std::size_t n, std::vector<std::vector<std::vector<std::size_t>>>& out,
                           std::vector<std::vector<std::size_t>> current = {}, std::size_t next = 0) {
  if (next == n) {
    if (current.size() >= 2) out.push_back(current);
    return;
  }
  for (std::size_t b = 0; b < current.size(); ++b) {
    current[b].push_back(next);
    all_partitions(n, out, current, next + 1);
    current[b].pop_back();
  }
  current.push_back({next});
  all_partitions(n, out, current, next + 1);
}

// BN subgraph induced by the argument's factors: parent -> owner edges for
// every factor node in the argument.
inline BayesianNetwork argument_subnetwork(const BayesianNetwork& bn, const FactorGraph& fg,
                                           const FactorArgument& fa) {
  std::set<std::size_t> owners;
  for (NodeId n : fa.nodes()) {
    if (fg.is_factor(n)) owners.insert(fg.variable_of(n));
  }
  std::vector<Cpt> cpts;
  for (std::size_t v = 0; v < bn.size(); ++v) {
    Cpt cpt;
    cpt.child = bn.variable(v);
    if (owners.count(v)) {
      for (std::size_t p : bn.parents(v)) cpt.parents.push_back(bn.variable(p));
    }
    std::size_t rows = 1;
    for (const auto& p : cpt.parents) rows *= p->cardinality();
    cpt.table.assign(rows * cpt.child->cardinality(), 1.0 / static_cast<double>(cpt.child->cardinality()));
    cpts.push_back(std::move(cpt));
  }
  return BayesianNetwork("sub", bn.variables(), cpts);
}

struct FixtureQuery {
  std::string label;
  BayesianNetwork bn;
  std::vector<std::pair<std::string, std::string>> evidence;
  std::string target;
};

inline std::vector<FixtureQuery> fixture_queries() {
  std::vector<FixtureQuery> q;
  auto add = [&](const std::string& label, BayesianNetwork bn, std::vector<std::pair<std::string, std::string>> ev,
                 std::string target) { q.push_back({label, std::move(bn), std::move(ev), std::move(target)}); };
  add("and_gate", fixture("and_gate"), {{"A", "1"}, {"B", "1"}}, "C");
  add("and_gate_single", fixture("and_gate"), {{"A", "1"}}, "C");
  add("chain", fixture("chain"), {{"A", "yes"}}, "C");
  add("asia_xray_tub", network("asia"), {{"XRay Result", "abnormal"}, {"Tuberculosis", "absent"}}, "Lung Cancer");
  add("asia_dysp_smoke", network("asia"), {{"Dyspnea", "present"}, {"Smoking", "smoker"}}, "Bronchitis");
  add("asia_visit_xray", network("asia"), {{"Visit To Asia", "visit"}, {"XRay Result", "normal"}}, "Tuberculosis");
  add("asia_three", network("asia"),
      {{"XRay Result", "abnormal"}, {"Dyspnea", "present"}, {"Smoking", "nonsmoker"}}, "Tuberculosis or Cancer");
  add("cancer", network("cancer"), {{"Xray", "positive"}, {"Smoker", "True"}}, "Cancer");
  add("earthquake", network("earthquake"), {{"JohnCalls", "True"}, {"MaryCalls", "True"}}, "Burglary");
  add("survey", network("survey"), {{"T", "car"}, {"A", "young"}}, "E");
  return q;
}

}  // namespace bnexplain::testing
