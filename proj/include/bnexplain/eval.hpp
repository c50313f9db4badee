#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnexplain/argument_search.hpp"
#include "bnexplain/inference.hpp"
#include "bnexplain/network.hpp"

namespace bnexplain {

struct TrialConfig {
  std::size_t min_evidence = 1;
  std::size_t max_evidence = 3;
  /// Trial i is seeded with seed_base + i.
  std::uint64_t seed_base = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;
  FaParams params;
  LoopyConfig loopy;
  /// Exact posteriors are logged for networks up to this size.
  std::size_t exact_limit = 25;
};

struct TrialResult {
  std::string network;
  std::uint64_t seed = 0;
  std::vector<Observation> evidence;
  std::size_t target = 0;
  /// False when the trial was skipped; `failure` says why.
  bool ok = false;
  std::string failure;
  std::vector<double> approx;
  std::vector<double> reference;
  std::optional<std::vector<double>> exact;
  std::vector<double> abs_error;
  double wall_time_s = 0.0;
  std::size_t fa_count = 0;
  std::vector<std::size_t> fa_lengths;
  std::vector<double> fa_strengths;
  bool converged = true;
};

/// Draws one random query per trial and compares the argument-based
/// posterior with message passing. Trials whose evidence is impossible or
/// whose search exceeds its budget are kept with ok == false.
std::vector<TrialResult> run_trials(const BayesianNetwork& bn, std::size_t n_trials, const TrialConfig& config);

/// Runs one trial with the given seed.
TrialResult run_trial(const BayesianNetwork& bn, const FactorGraph& fg, std::uint64_t seed,
                      const TrialConfig& config);

/// Rank correlation with average ranks for ties; nullopt when either side
/// has no rank variance.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of y on x over the finite pairs. `excluded` receives
/// the number of pairs dropped for being infinite or NaN.
std::optional<double> regression_slope(const std::vector<double>& x, const std::vector<double>& y,
                                       std::size_t* excluded = nullptr);

/// Width of a greedy min-fill elimination order on the moral graph.
std::size_t treewidth_estimate(const BayesianNetwork& bn);

/// |strength| of every output argument bucketed by argument length.
std::map<std::size_t, std::vector<double>> fa_length_stats(const std::vector<TrialResult>& trials);

struct EvalSummary {
  std::string network;
  std::size_t nodes = 0;
  std::size_t treewidth = 0;
  std::size_t trials = 0;
  std::size_t failed = 0;
  double mean_abs_err = 0.0;
  std::optional<double> spearman_rho;
  std::optional<double> slope;
  std::size_t slope_excluded = 0;
  double mean_time_s = 0.0;
  double std_time_s = 0.0;
  std::size_t nonconverged = 0;
  /// Rank correlation between argument length and |strength|.
  std::optional<double> length_strength_rho;
};

EvalSummary summarize(const BayesianNetwork& bn, const std::vector<TrialResult>& trials);

std::string report_csv(const std::vector<EvalSummary>& summaries);
std::string report_json(const std::vector<EvalSummary>& summaries);

/// Writes eval_report.csv and eval_report.json into `dir`.
void export_report(const std::vector<EvalSummary>& summaries, const std::filesystem::path& dir);

}  // namespace bnexplain
