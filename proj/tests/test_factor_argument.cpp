#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bnexplain/argument_search.hpp"
#include "bnexplain/errors.hpp"
#include "bnexplain/factor_argument.hpp"
#include "support.hpp"

namespace bnexplain {
namespace {

std::vector<double> values(const BeliefUpdate& u) {
  std::vector<double> out;
  for (std::size_t i = 0; i < u.size(); ++i) out.push_back(u[i]);
  return out;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "state " << i;
}

FactorArgument path_fa(const FactorGraph& fg, std::vector<std::string> names) {
  Path p;
  for (const auto& n : names) p.push_back(*fg.find(n));
  return FactorArgument::from_path(fg, p);
}

std::size_t bell(std::size_t n) {
  std::vector<std::vector<std::size_t>> t(n + 1, std::vector<std::size_t>(n + 1, 0));
  t[0][0] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    t[i][0] = t[i - 1][i - 1];
    for (std::size_t j = 1; j <= i; ++j) t[i][j] = t[i][j - 1] + t[i - 1][j - 1];
  }
  return t[n][0];
}

class AndGate : public ::testing::Test {
 protected:
  BayesianNetwork bn = testing::fixture("and_gate");
  FactorGraph fg{bn};
  FactorArgument from_a = path_fa(fg, {"A", "phi(C)", "C"});
  FactorArgument from_b = path_fa(fg, {"B", "phi(C)", "C"});
  Evidence both = Evidence::from_names(bn, {{"A", "1"}, {"B", "1"}});
};

TEST_F(AndGate, SingleSourceEffect) {
  auto e = fa_effect(fg, from_a, from_a.target(), both);
  expect_close(values(e), {0.25, 0.75}, 1e-12);
}

TEST_F(AndGate, JointEffectIsCertain) {
  auto joint = compose_fas(fg, {from_a, from_b});
  expect_close(values(fa_effect(fg, joint, joint.target(), both)), {0.0, 1.0}, 1e-12);
  EXPECT_EQ(argued_state(fa_effect(fg, joint, joint.target(), both)), 1u);
  EXPECT_TRUE(check_dependence(fg, {from_a, from_b}, 0.1, both));
}

TEST_F(AndGate, ValidationRejectsMalformedArguments) {
  NodeId a = *fg.find("A"), b = *fg.find("B"), c = *fg.find("C"), phi = *fg.find("phi(C)");
  EXPECT_THROW(FactorArgument(fg, {{a, c}}, c), ValidationError);
  EXPECT_THROW(FactorArgument(fg, {{a, phi}, {phi, c}, {phi, b}}, c), ValidationError);
  EXPECT_THROW(FactorArgument(fg, {{a, phi}}, phi), ValidationError);
  EXPECT_THROW(FactorArgument(fg, {}, c), ValidationError);
  EXPECT_THROW(compose_fas(fg, {from_a, path_fa(fg, {"C", "phi(C)", "B"})}), ValidationError);
}

TEST_F(AndGate, StructuralQueries) {
  auto joint = compose_fas(fg, {from_a, from_b});
  NodeId phi = *fg.find("phi(C)");
  EXPECT_EQ(joint.predecessors(phi), (std::vector<NodeId>{*fg.find("A"), *fg.find("B")}));
  EXPECT_EQ(joint.successors(phi), (std::vector<NodeId>{*fg.find("C")}));
  EXPECT_EQ(joint.sources(), (std::vector<NodeId>{*fg.find("A"), *fg.find("B")}));
  EXPECT_EQ(joint.encoding(fg), "A→phi(C);B→phi(C);phi(C)→C");
  EXPECT_EQ(joint.length(fg), 1u);
  EXPECT_TRUE(from_a.is_subgraph_of(joint));
  EXPECT_FALSE(joint.is_subgraph_of(from_a));
  EXPECT_EQ(compose_fas(fg, {from_a, from_a}), from_a);
  EXPECT_EQ(compose_fas(fg, {from_a, from_b}), compose_fas(fg, {from_b, from_a}));
}

TEST(StepEffect, MatchesExplicitSummation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto vars = testing::binary_variables(3);
  for (int trial = 0; trial < 300; ++trial) {
    Factor phi = testing::tabulate(vars, [&](const testing::Assignment&) { return u(rng); });
    std::vector<BeliefUpdate> premises;
    std::map<std::string, std::vector<double>> ref;
    std::size_t succ = trial % 3;
    for (std::size_t i = 0; i < 3; ++i) {
      if (i == succ || (trial / 3) % 2 == static_cast<int>(i % 2)) continue;
      double p = u(rng);
      premises.emplace_back(Factor({vars[i]}, {p, 1.0 - p}));
      ref[vars[i]->name] = {p, 1.0 - p};
    }
    auto se = step_effect(phi, premises, vars[succ]);
    expect_close(values(se), testing::reference_step(phi, ref, vars[succ]->name), 1e-12);
  }
}

TEST(StepEffect, UniformPremiseGivesUniformEffect) {
  auto bn = testing::network("asia");
  FactorGraph fg(bn);
  const Factor& phi = fg.factor(*fg.find("phi(Tuberculosis or Cancer)"));
  auto lung = bn.variable(bn.require_index("Lung Cancer"));
  auto tub = bn.variable(bn.require_index("Tuberculosis"));
  expect_close(values(step_effect(phi, {BeliefUpdate::uniform(tub)}, lung)), {0.5, 0.5}, 1e-12);
}

TEST(Distance, MatchesDefinition) {
  auto b = make_variable("B", {"x", "y"});
  BeliefUpdate u(Factor({b}, {0.2, 0.8})), v(Factor({b}, {0.6, 0.4}));
  EXPECT_NEAR(fa_distance(u, v), fa_distance(v, u), 1e-12);
  auto a = make_variable("A", {"x", "y", "z"});
  BeliefUpdate p(Factor({a}, {0.2, 0.3, 0.5})), q(Factor({a}, {0.6, 0.3, 0.1}));
  EXPECT_NEAR(fa_distance(p, p), 0.0, 1e-12);
  double expected = 0.0;
  std::vector<double> r{0.2 / 0.6, 1.0, 5.0};
  for (std::size_t o = 0; o < 3; ++o) {
    double rest = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (i != o) rest += r[i];
    }
    expected = std::max(expected, std::abs(std::log(r[o] / (rest / 2.0))));
  }
  EXPECT_NEAR(fa_distance(p, q), expected, 1e-12);
  EXPECT_THROW(fa_distance(p, BeliefUpdate(Factor({a}, {0.0, 0.5, 0.5}))), NumericError);
}

TEST(Strength, MatchesDefinition) {
  auto a = make_variable("A", {"x", "y", "z"});
  BeliefUpdate p(Factor({a}, {0.2, 0.3, 0.5}));
  for (std::size_t o = 0; o < 3; ++o) {
    EXPECT_NEAR(fa_strength(p, o), testing::reference_logodds({0.2, 0.3, 0.5}, o), 1e-12);
  }
  EXPECT_EQ(argued_state(p), 2u);
  EXPECT_EQ(argued_state(BeliefUpdate(Factor({a}, {0.1, 0.3, 0.6}))), 0u);
  auto b = make_variable("B", {"x", "y"});
  EXPECT_EQ(argued_state(BeliefUpdate(Factor({b}, {0.7, 0.3}))), 0u);
  EXPECT_EQ(argued_state(BeliefUpdate(Factor({b}, {0.3, 0.7}))), 1u);
}

TEST(Partitions, CountsMatchBellNumbers) {
  for (std::size_t n = 2; n <= 5; ++n) {
    auto parts = nontrivial_partitions(n);
    EXPECT_EQ(parts.size(), bell(n) - 1);
    std::vector<std::vector<std::vector<std::size_t>>> ref;
    testing::all_partitions(n, ref);
    EXPECT_EQ(parts.size(), ref.size());
  }
  for (std::size_t n = 6; n <= 8; ++n) EXPECT_EQ(nontrivial_partitions(n).size(), (std::size_t{1} << (n - 1)) - 1);
  for (const auto& p : nontrivial_partitions(4)) {
    std::vector<std::size_t> seen;
    for (const auto& block : p) seen.insert(seen.end(), block.begin(), block.end());
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3}));
  }
}

TEST(Dependence, DisjointArgumentsAreIndependent) {
  auto bn = testing::network("asia");
  FactorGraph fg(bn);
  auto ev = Evidence::from_names(bn, {{"Smoking", "smoker"}, {"Dyspnea", "present"}});
  auto a = path_fa(fg, {"Smoking", "phi(Bronchitis)", "Bronchitis"});
  auto b = path_fa(fg, {"Dyspnea", "phi(Dyspnea)", "Bronchitis"});
  EXPECT_FALSE(check_dependence(fg, {a, b}, 0.1, ev));
  auto joint = compose_fas(fg, {a, b});
  auto ea = fa_effect(fg, a, a.target(), ev), eb = fa_effect(fg, b, b.target(), ev);
  std::vector<double> prod{ea[0] * eb[0], ea[1] * eb[1]};
  expect_close(values(fa_effect(fg, joint, joint.target(), ev)), testing::normalized(prod), 1e-12);
}

TEST(Effect, LungCancerArgumentMatchesRecursionAndAnchor) {
  auto bn = testing::network("asia");
  FactorGraph fg(bn);
  auto ev = Evidence::from_names(bn, {{"XRay Result", "abnormal"}, {"Tuberculosis", "absent"}});
  auto joint = compose_fas(fg, {path_fa(fg, {"XRay Result", "phi(XRay Result)", "Tuberculosis or Cancer",
                                             "phi(Tuberculosis or Cancer)", "Lung Cancer"}),
                                path_fa(fg, {"Tuberculosis", "phi(Tuberculosis or Cancer)", "Lung Cancer"})});
  auto e = fa_effect(fg, joint, joint.target(), ev);
  expect_close(values(e), testing::reference_effect(fg, joint, joint.target(), ev), 1e-12);
  EXPECT_NEAR(e[0], 0.9515, 5e-5);
  EXPECT_NEAR(fa_strength(e, 0), 2.9755, 5e-5);
  auto trace = trace_fa(fg, joint, ev);
  EXPECT_EQ(trace.steps.size(), 2u);
  EXPECT_EQ(trace.steps.back().conclusion, joint.target());
}

TEST(Effect, MissingSourceEvidenceIsRejected) {
  auto bn = testing::fixture("chain");
  FactorGraph fg(bn);
  auto fa = path_fa(fg, {"A", "phi(B)", "B", "phi(C)", "C"});
  EXPECT_THROW(fa_effect(fg, fa, fa.target(), Evidence{}), ValidationError);
}

// Random path unions on random networks: recursion oracle, memo and
// d-separation.
class RandomArguments : public ::testing::Test {
 protected:
  struct Case {
    BayesianNetwork bn;
    std::vector<FactorArgument> fas;
    Evidence evidence;
    std::size_t target;
  };

  static Case draw(std::mt19937_64& rng) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(3, 8)(rng);
    auto bn = testing::random_network(rng, n, 3);
    FactorGraph fg(bn);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Evidence ev;
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n - 1))(rng);
    for (std::size_t i = 1; i <= k; ++i) ev.add(bn, order[i], rng() % 2);
    FaParams params;
    params.ml = 6;
    auto paths = path_arguments(fg, order[0], ev, params);
    std::vector<FactorArgument> fas = paths;
    for (std::size_t i = 0; i < paths.size() && i < 12; ++i) {
      for (std::size_t j = i + 1; j < paths.size() && j < 12; ++j) {
        if (auto u = try_compose(fg, {paths[i], paths[j]})) fas.push_back(*u);
      }
    }
    return {std::move(bn), std::move(fas), std::move(ev), order[0]};
  }
};

TEST_F(RandomArguments, EffectsMatchRecursionAndCache) {
  std::mt19937_64 rng(99);
  std::size_t checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto c = draw(rng);
    FactorGraph fg(c.bn);
    EffectCache cache;
    for (const auto& fa : c.fas) {
      auto ref = testing::reference_effect(fg, fa, fa.target(), c.evidence);
      auto plain = fa_effect(fg, fa, fa.target(), c.evidence);
      auto cached = fa_effect(fg, fa, fa.target(), c.evidence, &cache);
      auto again = fa_effect(fg, fa, fa.target(), c.evidence, &cache);
      expect_close(values(plain), ref, 1e-12);
      expect_close(values(cached), values(plain), 0.0);
      expect_close(values(again), values(plain), 0.0);
      for (NodeId n : fa.topological_order(fg)) {
        if (fg.is_variable(n)) expect_close(values(trace_fa(fg, fa, c.evidence).node_effects.at(n)),
                                            testing::reference_effect(fg, fa, n, c.evidence), 1e-12);
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST_F(RandomArguments, DSeparatedArgumentsHaveZeroStrength) {
  std::mt19937_64 rng(2024);
  std::size_t separated = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto c = draw(rng);
    FactorGraph fg(c.bn);
    for (const auto& fa : c.fas) {
      auto sub = testing::argument_subnetwork(c.bn, fg, fa);
      std::vector<std::size_t> sources;
      for (NodeId s : fa.sources()) sources.push_back(fg.variable_of(s));
      if (!d_separated(sub, sources, fg.variable_of(fa.target()), {})) continue;
      ++separated;
      auto e = fa_effect(fg, fa, fa.target(), c.evidence);
      for (std::size_t s = 0; s < e.size(); ++s) EXPECT_LT(std::abs(fa_strength(e, s)), 1e-9);
    }
  }
  EXPECT_GT(separated, 50u);
}

}  // namespace
}  // namespace bnexplain
