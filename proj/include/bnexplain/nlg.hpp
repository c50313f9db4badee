#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnexplain/argument_search.hpp"
#include "bnexplain/factor_argument.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain {

enum class Mode { kOverview, kDirect, kContrastive };

std::string to_string(Mode mode);
/// Accepts "overview", "direct" and "contrastive".
Mode parse_mode(std::string_view text);

enum class ReasoningPattern { kCausal, kEvidential, kIntercausal };

std::string to_string(ReasoningPattern pattern);

enum class Qualifier { kCertainly, kStrongly, kModerately, kWeakly, kTenuously };

/// Capitalized label, e.g. "Strongly".
std::string label(Qualifier q);

/// Strict thresholds: > 10, > 1, > 0.5, > 0.1, otherwise Tenuously.
/// Infinity maps to Certainly.
Qualifier qualifier(double range);

/// max - min of the per-state logodds of `update`; infinite when any state
/// has an infinite logodds.
double logodds_range(const BeliefUpdate& update);

/// Causal when the conclusion owns the step's factor. Intercausal when the
/// owner is a premise and another premise is a co-parent of the conclusion.
/// Evidential otherwise.
ReasoningPattern classify_step(const BayesianNetwork& bn, const FactorGraph& fg, const StepTrace& step);

/// Step effect with the child premise set to its verbalized state and every
/// co-parent premise replaced by a uniform update.
BeliefUpdate counterfactual_effect(const BayesianNetwork& bn, const FactorGraph& fg, const StepTrace& step,
                                   const FaTrace& trace, const Evidence& evidence);

struct PremiseText {
  std::string variable;
  std::string state;
  bool observed;
};

/// One rendered sentence and the pieces it was built from.
struct Sentence {
  /// "evidence", "rule", "cumulative", "counterfactual", "factual" or "overview".
  std::string kind;
  std::vector<PremiseText> premises;
  std::string verb;
  std::string conclusion;
  std::string state;
  std::optional<std::string> qualifier;
  std::string text;
};

struct Explanation {
  Mode mode;
  std::vector<Sentence> sentences;
  /// Sentences joined by newlines.
  std::string text;
};

/// Verbalizes a ranked argument. Node and state names are wrapped in angle
/// brackets.
Explanation render(const BayesianNetwork& bn, const FactorGraph& fg, const RankedFa& fa, Mode mode,
                   const Evidence& evidence);

/// Removes the angle-bracket markup around names.
std::string strip_markup(std::string_view text);

/// Single sentence describing how the most changed state of the target moved.
std::string render_baseline_summary(const BeliefUpdate& prior, const BeliefUpdate& posterior);

}  // namespace bnexplain
