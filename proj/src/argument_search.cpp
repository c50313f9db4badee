#include "bnexplain/argument_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

void check_deadline(const FaParams& params) {
  if (params.deadline && std::chrono::steady_clock::now() > *params.deadline) {
    throw CapacityError("argument search exceeded its time budget; lower MC or ML");
  }
}

// Calls `visit` with every k-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_combination(std::size_t n, std::size_t k, Visit&& visit) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i-- > 0) {
      if (idx[i] < n - k + i) {
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        break;
      }
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

double binomial(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) out = out * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return out;
}

struct Candidate {
  FactorArgument argument;
  double strength;
};

bool ranks_before(const FactorGraph& fg, const Candidate& a, const Candidate& b) {
  double sa = std::abs(a.strength), sb = std::abs(b.strength);
  if (sa != sb) return sa > sb;
  if (a.argument.nodes().size() != b.argument.nodes().size()) {
    return a.argument.nodes().size() < b.argument.nodes().size();
  }
  return a.argument.encoding(fg) < b.argument.encoding(fg);
}

void drop_subgraphs(std::vector<Candidate>& set) {
  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < set.size() && !covered; ++j) {
      if (i == j) continue;
      if (set[i].argument.is_subgraph_of(set[j].argument)) {
        // equal arguments: keep the first copy only
        covered = !(set[i].argument == set[j].argument) || j < i;
      }
    }
    if (!covered) kept.push_back(set[i]);
  }
  set = std::move(kept);
}

class Search {
 public:
  Search(const FactorGraph& fg, std::size_t target, const Evidence& evidence, const FaParams& params)
      : fg_(fg), target_(target), evidence_(evidence), params_(params) {}

  std::optional<Candidate> score(const FactorArgument& fa) {
    try {
      BeliefUpdate effect = fa_effect(fg_, fa, target_, evidence_, &cache_);
      return Candidate{fa, fa_strength(effect, argued_state(effect))};
    } catch (const NumericError&) {
      return std::nullopt;
    }
  }

  bool dependent(const std::vector<FactorArgument>& parts,
                 const std::function<bool(const std::vector<std::size_t>&)>& allow = {}) {
    try {
      return check_dependence(fg_, parts, params_.dt, evidence_, &cache_, allow);
    } catch (const NumericError&) {
      return false;
    }
  }

  std::vector<Candidate> proper_combinations(const std::vector<FactorArgument>& paths) {
    std::vector<Candidate> out;
    std::set<std::vector<std::size_t>> proper;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (auto c = score(paths[i])) {
        out.push_back(*c);
        proper.insert({i});
      }
    }
    const std::size_t top = std::min(params_.mc, paths.size());
    double total = 0.0;
    for (std::size_t k = 2; k <= top; ++k) total += binomial(paths.size(), k);
    if (total > static_cast<double>(params_.max_combinations)) {
      throw CapacityError("argument search would test " + std::to_string(static_cast<long long>(total)) +
                          " path combinations (limit " + std::to_string(params_.max_combinations) +
                          "); lower MC or ML");
    }
    for (std::size_t k = 2; k <= top; ++k) {
      std::vector<std::vector<std::size_t>> accepted;
      for_each_combination(paths.size(), k, [&](const std::vector<std::size_t>& idx) {
        check_deadline(params_);
        std::vector<FactorArgument> parts;
        for (std::size_t i : idx) parts.push_back(paths[i]);
        if (!try_compose(fg_, parts)) return;
        if (!std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return proper.count({i}); })) return;
        auto allow = [&](const std::vector<std::size_t>& block) {
          if (block.size() == 1) return true;
          std::vector<std::size_t> key;
          for (std::size_t b : block) key.push_back(idx[b]);
          return proper.count(key) > 0;
        };
        if (!dependent(parts, allow)) return;
        if (auto c = score(compose_fas(fg_, parts))) {
          out.push_back(*c);
          accepted.push_back(idx);
        }
      });
      proper.insert(accepted.begin(), accepted.end());
    }
    return out;
  }

  // Merges dependent pairs, strongest first, until every pair is independent.
  void refine(std::vector<Candidate>& set) {
    while (true) {
      std::sort(set.begin(), set.end(), [&](const auto& a, const auto& b) { return ranks_before(fg_, a, b); });
      drop_subgraphs(set);
      bool merged = false;
      for (std::size_t i = 0; i < set.size() && !merged; ++i) {
        for (std::size_t j = i + 1; j < set.size() && !merged; ++j) {
          check_deadline(params_);
          std::vector<FactorArgument> pair{set[i].argument, set[j].argument};
          if (!try_compose(fg_, pair) || !dependent(pair)) continue;
          auto joint = score(compose_fas(fg_, pair));
          if (!joint) continue;
          set.erase(set.begin() + static_cast<std::ptrdiff_t>(j));
          set.erase(set.begin() + static_cast<std::ptrdiff_t>(i));
          set.push_back(*joint);
          merged = true;
        }
      }
      if (!merged) return;
    }
  }

 private:
  const FactorGraph& fg_;
  std::size_t target_;
  const Evidence& evidence_;
  const FaParams& params_;
  EffectCache cache_;
};

}  // namespace

void FaParams::validate() const {
  if (ml < 1) throw ValidationError("ML must be at least 1");
  if (mc < 1) throw ValidationError("MC must be at least 1");
  if (!(dt > 0.0) || std::isinf(dt)) throw ValidationError("DT must be a positive finite number");
  if (std::isnan(min_strength) || min_strength < 0.0) throw ValidationError("min strength must be >= 0");
}

std::vector<FactorArgument> path_arguments(const FactorGraph& fg, std::size_t target,
                                           const Evidence& evidence, const FaParams& params) {
  std::set<NodeId> observed;
  for (const auto& o : evidence.observations()) observed.insert(fg.variable_node(o.variable));
  std::vector<FactorArgument> out;
  for (const auto& o : evidence.observations()) {
    NodeId from = fg.variable_node(o.variable);
    std::set<NodeId> blocked = observed;
    blocked.erase(from);
    for (const auto& path : simple_paths(fg, from, fg.variable_node(target), params.ml, blocked)) {
      out.push_back(FactorArgument::from_path(fg, path));
      if (out.size() > params.max_paths) {
        throw CapacityError("more than " + std::to_string(params.max_paths) +
                            " simple paths reach the target; set a smaller ML");
      }
    }
  }
  return out;
}

RankedFa rank_argument(const FactorGraph& fg, const FactorArgument& fa, const Evidence& evidence) {
  FaTrace trace = trace_fa(fg, fa, evidence);
  BeliefUpdate effect = trace.node_effects.at(fa.target());
  std::size_t state = argued_state(effect);
  double strength = fa_strength(effect, state);
  return RankedFa{fa, effect, strength, state, std::move(trace), fa.encoding(fg)};
}

std::vector<RankedFa> find_maximal_proper_fas(const BayesianNetwork& bn, const FactorGraph& fg,
                                              std::size_t target, const Evidence& evidence,
                                              const FaParams& params) {
  params.validate();
  if (evidence.empty()) throw ValidationError("argument search needs at least one observation");
  evidence.check_target(bn, target);

  Search search(fg, target, evidence, params);
  auto paths = path_arguments(fg, target, evidence, params);
  auto set = search.proper_combinations(paths);
  search.refine(set);

  std::sort(set.begin(), set.end(), [&](const auto& a, const auto& b) { return ranks_before(fg, a, b); });
  std::vector<RankedFa> out;
  for (const auto& c : set) {
    if (out.size() >= params.top_n) break;
    if (std::abs(c.strength) < params.min_strength) continue;
    out.push_back(rank_argument(fg, c.argument, evidence));
  }
  return out;
}

BeliefUpdate approximate_posterior(const BeliefUpdate& prior, const std::vector<RankedFa>& fas) {
  Factor joint = prior.factor();
  for (const auto& fa : fas) {
    if (fa.effect.variable().name != prior.variable().name) {
      throw ValidationError("argument effect on '" + fa.effect.variable().name + "' cannot update '" +
                            prior.variable().name + "'");
    }
    joint = product(joint, fa.effect.factor());
  }
  if (!(joint.total() > 0.0)) throw NumericError("approximate posterior has zero total mass");
  return BeliefUpdate(normalize(joint));
}

}  // namespace bnexplain
