#include <gtest/gtest.h>

#include <random>

#include "bnexplain/errors.hpp"
#include "bnexplain/inference.hpp"
#include "support.hpp"

namespace bnexplain {
namespace {

void expect_close(const BeliefUpdate& u, const std::vector<double>& v, double tol) {
  ASSERT_EQ(u.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(u[i], v[i], tol);
}

TEST(ExactInference, MatchesJointOracleOnRandomNetworks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto bn = testing::random_network(rng, 6, 3);
    std::size_t target = trial % bn.size();
    Evidence ev;
    for (std::size_t v = 0; v < bn.size(); ++v) {
      if (v != target && std::uniform_int_distribution<int>(0, 2)(rng) == 0) ev.add(bn, v, rng() % 2);
    }
    expect_close(exact_posterior(bn, ev, target), testing::joint_posterior(bn, ev, target), 1e-9);
  }
}

TEST(ExactInference, ImpossibleEvidenceThrows) {
  auto bn = testing::fixture("and_gate");
  auto ev = Evidence::from_names(bn, {{"A", "0"}, {"C", "1"}});
  EXPECT_THROW(exact_posterior(bn, ev, bn.require_index("B")), NumericError);
}

TEST(ExactInference, CapacityLimit) {
  auto bn = testing::network("alarm");
  EXPECT_THROW(exact_posterior(bn, Evidence{}, 0, 10), CapacityError);
}

TEST(LoopyInference, ExactOnTrees) {
  for (const char* name : {"cancer", "earthquake"}) {
    auto bn = testing::network(name);
    FactorGraph fg(bn);
    for (std::size_t t = 0; t < bn.size(); ++t) {
      Evidence ev;
      ev.add(bn, (t + 1) % bn.size(), 0);
      auto r = loopy_posterior(fg, ev, t);
      EXPECT_TRUE(r.converged);
      expect_close(r.marginal, testing::joint_posterior(bn, ev, t), 1e-7);
    }
  }
}

TEST(LoopyInference, AndGate) {
  auto bn = testing::fixture("and_gate");
  FactorGraph fg(bn);
  auto c = bn.require_index("C");
  expect_close(loopy_posterior(fg, Evidence::from_names(bn, {{"A", "1"}, {"B", "1"}}), c).marginal, {0, 1}, 1e-7);
  expect_close(loopy_posterior(fg, Evidence::from_names(bn, {{"A", "1"}}), c).marginal, {0.5, 0.5}, 1e-7);
  expect_close(prior_marginal(fg, c).marginal, {0.75, 0.25}, 1e-7);
}

TEST(LoopyInference, ScheduleAndOrderDoNotChangeTreeResults) {
  auto bn = testing::network("asia");
  FactorGraph fg(bn);
  auto ev = Evidence::from_names(bn, {{"Dyspnea", "present"}, {"Visit To Asia", "visit"}});
  auto t = bn.require_index("Bronchitis");
  auto base = loopy_posterior(fg, ev, t).marginal;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    LoopyConfig cfg;
    cfg.schedule = Schedule::kSequential;
    cfg.order_seed = seed;
    auto r = loopy_posterior(fg, ev, t, cfg);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(r.marginal[i], base[i], 1e-6);
  }
}

TEST(LoopyInference, CloseToExactOnAsia) {
  auto bn = testing::network("asia");
  FactorGraph fg(bn);
  auto ev = Evidence::from_names(bn, {{"XRay Result", "abnormal"}, {"Smoking", "smoker"}});
  for (std::size_t t = 0; t < bn.size(); ++t) {
    if (ev.contains(t)) continue;
    auto r = loopy_posterior(fg, ev, t);
    auto exact = exact_posterior(bn, ev, t);
    double total = 0.0;
    for (std::size_t i = 0; i < r.marginal.size(); ++i) {
      total += r.marginal[i];
      EXPECT_NEAR(r.marginal[i], exact[i], 0.05);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace bnexplain
