#include "bnexplain/nlg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

std::string br(std::string_view s) { return "<" + std::string(s) + ">"; }

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string join_and(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

bool is_parent(const BayesianNetwork& bn, std::size_t parent, std::size_t child) {
  const auto& ps = bn.parents(child);
  return std::find(ps.begin(), ps.end(), parent) != ps.end();
}

class Renderer {
 public:
  Renderer(const BayesianNetwork& bn, const FactorGraph& fg, const RankedFa& fa, const Evidence& evidence)
      : bn_(bn), fg_(fg), fa_(fa), evidence_(evidence) {}

  std::size_t verbal_state(NodeId node) const {
    if (auto s = evidence_.state_of(fg_.variable_of(node))) return *s;
    auto it = fa_.trace.node_effects.find(node);
    if (it == fa_.trace.node_effects.end()) {
      throw ValidationError("argument trace has no update for '" + fg_.name(node) + "'");
    }
    return argued_state(it->second);
  }

  PremiseText premise(NodeId node) const {
    return {fg_.name(node), fg_.variable(node)->states[verbal_state(node)], evidence_.contains(fg_.variable_of(node))};
  }

  // The factor's owner first, then declaration order.
  std::vector<NodeId> ordered_premises(const StepTrace& step) const {
    std::vector<NodeId> out = step.premises;
    const std::size_t owner = fg_.variable_of(step.factor);
    std::stable_sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
      bool oa = fg_.variable_of(a) == owner, ob = fg_.variable_of(b) == owner;
      if (oa != ob) return oa;
      return fg_.variable_of(a) < fg_.variable_of(b);
    });
    return out;
  }

  std::vector<NodeId> ordered_sources() const {
    std::vector<NodeId> out;
    for (const auto& o : evidence_.observations()) {
      NodeId n = fg_.variable_node(o.variable);
      if (fa_.argument.contains(n) && fa_.argument.predecessors(n).empty()) out.push_back(n);
    }
    return out;
  }

  std::string role(NodeId node) const { return node == fa_.argument.target() ? "target" : "intermediate"; }

  Sentence evidence_sentence() const {
    Sentence s{"evidence", {}, "", "", "", std::nullopt, ""};
    std::vector<std::string> parts;
    for (NodeId n : ordered_sources()) {
      s.premises.push_back(premise(n));
      parts.push_back(br(s.premises.back().variable) + " is " + br(s.premises.back().state));
    }
    s.text = "We have observed that " + join_and(parts) + ".";
    return s;
  }

  Sentence overview_sentence() const {
    Sentence s = evidence_sentence();
    s.kind = "overview";
    std::vector<std::string> parts;
    for (const auto& p : s.premises) parts.push_back(br(p.variable) + " is " + br(p.state));
    NodeId t = fa_.argument.target();
    s.conclusion = fg_.name(t);
    s.state = fg_.variable(t)->states[fa_.argued_state];
    s.verb = "infer";
    s.text = "Since " + join_and(parts) + ", we infer that " + br(s.conclusion);
    s.text += fa_.strength < 0.0 ? " is less likely to be " + br(s.state) + "." : " = " + br(s.state) + ".";
    return s;
  }

  // "<X> becomes {q} {more|less} likely to be <x>." for an update on `node`.
  void describe_update(Sentence& s, NodeId node, const BeliefUpdate& update) const {
    std::size_t st = argued_state(update);
    s.conclusion = fg_.name(node);
    s.state = fg_.variable(node)->states[st];
    s.qualifier = label(qualifier(logodds_range(update)));
    const char* direction = logodds(update, st) < 0.0 ? "less" : "more";
    s.text += "the " + role(node) + " node " + br(s.conclusion) + " becomes " + lower(*s.qualifier) + " " +
              direction + " likely to be " + br(s.state) + ".";
  }

  Sentence rule_sentence(const StepTrace& step) const {
    ReasoningPattern pattern = classify_step(bn_, fg_, step);
    Sentence s{"rule", {}, pattern == ReasoningPattern::kCausal ? "causes" : "is evidence that", "", "",
               std::nullopt, ""};
    std::vector<std::string> parts;
    for (NodeId p : ordered_premises(step)) {
      s.premises.push_back(premise(p));
      parts.push_back(br(s.premises.back().variable) + " = " + br(s.premises.back().state));
    }
    s.text = "The updated probability of " + join_and(parts) + " " + s.verb + " ";
    describe_update(s, step.conclusion, step.effect);
    return s;
  }

  Sentence cumulative_sentence(NodeId node) const {
    Sentence s{"cumulative", {}, "", "", "", std::nullopt, "All in all, "};
    describe_update(s, node, fa_.trace.node_effects.at(node));
    return s;
  }

  std::vector<Sentence> contrastive_sentences(const StepTrace& step) const {
    const std::size_t owner = fg_.variable_of(step.factor);
    const auto& x_var = fg_.variable(step.conclusion);
    BeliefUpdate cf = counterfactual_effect(bn_, fg_, step, fa_.trace, evidence_);
    std::size_t x_cf = argued_state(cf);
    std::size_t x_f = argued_state(step.effect);

    Sentence first{"counterfactual", {}, "", fg_.name(step.conclusion), x_var->states[x_cf], std::nullopt, ""};
    Sentence second{"factual", {}, "", fg_.name(step.conclusion), x_var->states[x_f], std::nullopt, ""};
    std::vector<std::string> child_parts, coparent_parts;
    for (NodeId p : ordered_premises(step)) {
      PremiseText pt = premise(p);
      if (fg_.variable_of(p) == owner) {
        first.premises.push_back(pt);
        child_parts.push_back("the " + br(pt.variable) + " = " + br(pt.state));
      } else {
        second.premises.push_back(pt);
        coparent_parts.push_back("the " + br(pt.variable) + (pt.observed ? " is " : " = ") + br(pt.state));
      }
    }
    first.verb = "usually";
    first.text = "Usually, if " + join_and(child_parts) + " then the " + br(first.conclusion) + " = " +
                 br(first.state) + ".";

    second.text = "Since " + join_and(coparent_parts) + ", ";
    const std::string outcome = br(second.conclusion) + " = " + br(second.state);
    if (x_cf != x_f) {
      second.verb = "infer instead";
      second.text += "we infer " + outcome + " instead.";
    } else if (logodds(step.effect, x_f) > logodds(cf, x_f)) {
      double range;
      try {
        range = logodds_range(BeliefUpdate(normalize(divide(step.effect.factor(), cf.factor()))));
      } catch (const NumericError&) {
        range = std::numeric_limits<double>::infinity();
      }
      second.verb = "can";
      second.qualifier = label(qualifier(range));
      second.text += "we can be " + lower(*second.qualifier) + " more certain that " + outcome + ".";
    } else {
      second.verb = "can not";
      second.text += "we can not be more certain that " + outcome + ".";
    }
    return {first, second};
  }

  double step_strength(const StepTrace& step) const {
    return std::abs(logodds(step.effect, argued_state(step.effect)));
  }

  std::vector<Sentence> steps(Mode mode) const {
    std::vector<Sentence> out;
    const auto& all = fa_.trace.steps;
    for (std::size_t begin = 0; begin < all.size();) {
      std::size_t end = begin;
      while (end < all.size() && all[end].conclusion == all[begin].conclusion) ++end;
      std::vector<std::pair<double, std::vector<Sentence>>> group;
      for (std::size_t i = begin; i < end; ++i) {
        const StepTrace& step = all[i];
        if (mode == Mode::kContrastive && classify_step(bn_, fg_, step) == ReasoningPattern::kIntercausal) {
          group.push_back({step_strength(step), contrastive_sentences(step)});
        } else {
          group.push_back({step_strength(step), {rule_sentence(step)}});
        }
      }
      std::stable_sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.front().text < b.second.front().text;
      });
      for (auto& g : group) {
        for (auto& s : g.second) out.push_back(std::move(s));
      }
      if (end - begin > 1) out.push_back(cumulative_sentence(all[begin].conclusion));
      begin = end;
    }
    return out;
  }

 private:
  const BayesianNetwork& bn_;
  const FactorGraph& fg_;
  const RankedFa& fa_;
  const Evidence& evidence_;
};

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kOverview:
      return "overview";
    case Mode::kDirect:
      return "direct";
    case Mode::kContrastive:
      return "contrastive";
  }
  return "direct";
}

Mode parse_mode(std::string_view text) {
  if (text == "overview") return Mode::kOverview;
  if (text == "direct") return Mode::kDirect;
  if (text == "contrastive") return Mode::kContrastive;
  throw ValidationError("unknown explanation mode '" + std::string(text) +
                        "'; expected overview, direct or contrastive");
}

std::string to_string(ReasoningPattern pattern) {
  switch (pattern) {
    case ReasoningPattern::kCausal:
      return "causal";
    case ReasoningPattern::kEvidential:
      return "evidential";
    case ReasoningPattern::kIntercausal:
      return "intercausal";
  }
  return "evidential";
}

std::string label(Qualifier q) {
  switch (q) {
    case Qualifier::kCertainly:
      return "Certainly";
    case Qualifier::kStrongly:
      return "Strongly";
    case Qualifier::kModerately:
      return "Moderately";
    case Qualifier::kWeakly:
      return "Weakly";
    case Qualifier::kTenuously:
      return "Tenuously";
  }
  return "Tenuously";
}

Qualifier qualifier(double range) {
  if (range > 10.0) return Qualifier::kCertainly;
  if (range > 1.0) return Qualifier::kStrongly;
  if (range > 0.5) return Qualifier::kModerately;
  if (range > 0.1) return Qualifier::kWeakly;
  return Qualifier::kTenuously;
}

double logodds_range(const BeliefUpdate& update) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : logodds_all(update)) {
    if (std::isnan(v) || std::isinf(v)) return std::numeric_limits<double>::infinity();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

ReasoningPattern classify_step(const BayesianNetwork& bn, const FactorGraph& fg, const StepTrace& step) {
  const std::size_t owner = fg.variable_of(step.factor);
  const std::size_t x = fg.variable_of(step.conclusion);
  if (x == owner) return ReasoningPattern::kCausal;
  bool child_premise = false, coparent_premise = false;
  for (NodeId p : step.premises) {
    std::size_t v = fg.variable_of(p);
    if (v == owner) {
      child_premise = true;
    } else if (is_parent(bn, v, owner)) {
      coparent_premise = true;
    }
  }
  return child_premise && coparent_premise ? ReasoningPattern::kIntercausal : ReasoningPattern::kEvidential;
}

BeliefUpdate counterfactual_effect(const BayesianNetwork& bn, const FactorGraph& fg, const StepTrace& step,
                                   const FaTrace& trace, const Evidence& evidence) {
  if (classify_step(bn, fg, step) != ReasoningPattern::kIntercausal) {
    throw ValidationError("counterfactual effects are defined for intercausal steps only");
  }
  const std::size_t owner = fg.variable_of(step.factor);
  std::vector<BeliefUpdate> premises;
  for (NodeId p : step.premises) {
    const auto& var = fg.variable(p);
    if (fg.variable_of(p) == owner) {
      auto s = evidence.state_of(owner);
      std::size_t state = s ? *s : argued_state(trace.node_effects.at(p));
      premises.push_back(obs(var, var->states[state]));
    } else {
      premises.push_back(BeliefUpdate::uniform(var));
    }
  }
  return step_effect(fg.factor(step.factor), premises, fg.variable(step.conclusion));
}

Explanation render(const BayesianNetwork& bn, const FactorGraph& fg, const RankedFa& fa, Mode mode,
                   const Evidence& evidence) {
  if (fa.trace.node_effects.empty()) throw ValidationError("argument has no evaluation trace to render");
  Renderer r(bn, fg, fa, evidence);
  Explanation out{mode, {}, ""};
  if (mode == Mode::kOverview) {
    out.sentences.push_back(r.overview_sentence());
  } else {
    out.sentences.push_back(r.evidence_sentence());
    for (auto& s : r.steps(mode)) out.sentences.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < out.sentences.size(); ++i) {
    if (i) out.text += '\n';
    out.text += out.sentences[i].text;
  }
  return out;
}

std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '<' && c != '>') out += c;
  }
  return out;
}

std::string render_baseline_summary(const BeliefUpdate& prior, const BeliefUpdate& posterior) {
  if (prior.variable().name != posterior.variable().name || prior.size() != posterior.size()) {
    throw ValidationError("baseline summary needs prior and posterior over the same variable");
  }
  std::size_t state = 0;
  bool changed = false;
  try {
    BeliefUpdate ratio(normalize(divide(posterior.factor(), prior.factor())));
    state = argued_state(ratio);
    changed = logodds_range(ratio) > 0.0;
  } catch (const NumericError&) {
  }
  if (!changed) {
    for (std::size_t i = 1; i < posterior.size(); ++i) {
      if (posterior[i] > posterior[state]) state = i;
    }
  }
  char before[16], after[16];
  std::snprintf(before, sizeof before, "%.0f%%", 100.0 * prior[state]);
  std::snprintf(after, sizeof after, "%.0f%%", 100.0 * posterior[state]);
  std::string head = "The probability of " + br(prior.variable().name) + " = " +
                     br(prior.variable().states[state]);
  if (std::string(before) == after) return head + " remains " + before + ".";
  return head + " changed from " + before + " to " + after + ".";
}

}  // namespace bnexplain
