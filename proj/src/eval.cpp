#include "bnexplain/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <json.hpp>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

std::vector<double> to_vector(const BeliefUpdate& u) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i];
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : "NA"; }

}  // namespace

TrialResult run_trial(const BayesianNetwork& bn, const FactorGraph& fg, std::uint64_t seed,
                      const TrialConfig& config) {
  TrialResult r;
  r.network = bn.name();
  r.seed = seed;
  if (bn.size() < 2) {
    r.failure = "network needs at least two variables";
    return r;
  }
  std::mt19937_64 rng(seed);
  const std::size_t hi = std::min(config.max_evidence, bn.size() - 1);
  const std::size_t lo = std::min(config.min_evidence, hi);
  const std::size_t count = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  std::vector<std::size_t> nodes(bn.size());
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  r.target = nodes[0];
  Evidence evidence;
  for (std::size_t i = 1; i <= count; ++i) {
    const std::size_t v = nodes[i];
    std::size_t state = std::uniform_int_distribution<std::size_t>(0, bn.variable(v)->cardinality() - 1)(rng);
    evidence.add(bn, v, state);
  }
  r.evidence = evidence.observations();

  try {
    if (bn.size() <= config.exact_limit) {
      r.exact = to_vector(exact_posterior(bn, evidence, r.target, config.exact_limit));
    }
    LoopyResult ref = loopy_posterior(fg, evidence, r.target, config.loopy);
    r.reference = to_vector(ref.marginal);
    r.converged = ref.converged;
    BeliefUpdate prior = prior_marginal(fg, r.target, config.loopy).marginal;

    auto start = std::chrono::steady_clock::now();
    auto fas = find_maximal_proper_fas(bn, fg, r.target, evidence, config.params);
    BeliefUpdate approx = approximate_posterior(prior, fas);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    r.approx = to_vector(approx);
    for (std::size_t i = 0; i < r.approx.size(); ++i) r.abs_error.push_back(std::abs(r.approx[i] - r.reference[i]));
    r.fa_count = fas.size();
    for (const auto& fa : fas) {
      r.fa_lengths.push_back(fa.argument.length(fg));
      r.fa_strengths.push_back(fa.strength);
    }
    r.ok = true;
  } catch (const NumericError& e) {
    r.failure = std::string("impossible evidence: ") + e.what();
  } catch (const CapacityError& e) {
    r.failure = std::string("capacity: ") + e.what();
  }
  return r;
}

std::vector<TrialResult> run_trials(const BayesianNetwork& bn, std::size_t n_trials, const TrialConfig& config) {
  if (n_trials < 1) throw ValidationError("at least one trial is required");
  config.params.validate();
  FactorGraph fg(bn);
  std::vector<TrialResult> out(n_trials);
  std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      out[i] = run_trial(bn, fg, config.seed_base + i, config);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw ValidationError("spearman needs two equal, nonempty lists");
  return pearson(average_ranks(x), average_ranks(y));
}

std::optional<double> regression_slope(const std::vector<double>& x, const std::vector<double>& y,
                                       std::size_t* excluded) {
  if (x.size() != y.size()) throw ValidationError("regression needs two equal-length lists");
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      fx.push_back(x[i]);
      fy.push_back(y[i]);
    }
  }
  if (excluded) *excluded = x.size() - fx.size();
  if (fx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(fx.size());
  double mx = std::accumulate(fx.begin(), fx.end(), 0.0) / n;
  double my = std::accumulate(fy.begin(), fy.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    sxy += (fx[i] - mx) * (fy[i] - my);
    sxx += (fx[i] - mx) * (fx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

std::size_t treewidth_estimate(const BayesianNetwork& bn) {
  const std::size_t n = bn.size();
  std::vector<std::set<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (std::size_t v = 0; v < n; ++v) {
    const auto& ps = bn.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      link(ps[i], v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) link(ps[i], ps[j]);
    }
  }
  std::vector<bool> gone(n, false);
  std::size_t width = 0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n, best_fill = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (gone[v]) continue;
      std::size_t fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end(); ++a) {
        for (auto b = std::next(a); b != adj[v].end(); ++b) {
          if (!adj[*a].count(*b)) ++fill;
        }
      }
      if (best == n || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    width = std::max(width, adj[best].size());
    std::vector<std::size_t> nbrs(adj[best].begin(), adj[best].end());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) link(nbrs[i], nbrs[j]);
    }
    for (std::size_t u : nbrs) adj[u].erase(best);
    adj[best].clear();
    gone[best] = true;
  }
  return width;
}

std::map<std::size_t, std::vector<double>> fa_length_stats(const std::vector<TrialResult>& trials) {
  std::map<std::size_t, std::vector<double>> out;
  for (const auto& t : trials) {
    if (!t.ok) continue;
    for (std::size_t i = 0; i < t.fa_lengths.size(); ++i) out[t.fa_lengths[i]].push_back(std::abs(t.fa_strengths[i]));
  }
  return out;
}

EvalSummary summarize(const BayesianNetwork& bn, const std::vector<TrialResult>& trials) {
  EvalSummary s;
  s.network = bn.name();
  s.nodes = bn.size();
  s.treewidth = treewidth_estimate(bn);
  std::vector<double> approx, reference, approx_lo, reference_lo, times;
  double err_total = 0.0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++s.failed;
      continue;
    }
    ++s.trials;
    if (!t.converged) ++s.nonconverged;
    err_total += std::accumulate(t.abs_error.begin(), t.abs_error.end(), 0.0) / static_cast<double>(t.abs_error.size());
    times.push_back(t.wall_time_s);
    const auto& var = bn.variable(t.target);
    BeliefUpdate a(Factor({var}, t.approx)), r(Factor({var}, t.reference));
    for (std::size_t i = 0; i < t.approx.size(); ++i) {
      approx.push_back(t.approx[i]);
      reference.push_back(t.reference[i]);
      approx_lo.push_back(logodds(a, i));
      reference_lo.push_back(logodds(r, i));
    }
  }
  if (s.trials == 0) return s;
  s.mean_abs_err = err_total / static_cast<double>(s.trials);
  s.spearman_rho = spearman(approx, reference);
  s.slope = regression_slope(approx_lo, reference_lo, &s.slope_excluded);
  s.mean_time_s = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - s.mean_time_s) * (t - s.mean_time_s);
  s.std_time_s = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;

  std::vector<double> lengths, strengths;
  for (const auto& [len, values] : fa_length_stats(trials)) {
    for (double v : values) {
      lengths.push_back(static_cast<double>(len));
      strengths.push_back(v);
    }
  }
  if (!lengths.empty()) s.length_strength_rho = spearman(lengths, strengths);
  return s;
}

std::string report_csv(const std::vector<EvalSummary>& summaries) {
  std::string out = "network,nodes,treewidth_est,trials,mean_abs_err,spearman_rho,slope,mean_time_s,std_time_s,nonconverged\n";
  for (const auto& s : summaries) {
    out += s.network + "," + std::to_string(s.nodes) + "," + std::to_string(s.treewidth) + "," +
           std::to_string(s.trials) + "," + number(s.mean_abs_err) + "," + number(s.spearman_rho) + "," +
           number(s.slope) + "," + number(s.mean_time_s) + "," + number(s.std_time_s) + "," +
           std::to_string(s.nonconverged) + "\n";
  }
  return out;
}

std::string report_json(const std::vector<EvalSummary>& summaries) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    nlohmann::ordered_json row;
    row["network"] = s.network;
    row["nodes"] = s.nodes;
    row["treewidth_est"] = s.treewidth;
    row["trials"] = s.trials;
    row["mean_abs_err"] = s.mean_abs_err;
    row["spearman_rho"] = opt(s.spearman_rho);
    row["slope"] = opt(s.slope);
    row["mean_time_s"] = s.mean_time_s;
    row["std_time_s"] = s.std_time_s;
    row["nonconverged"] = s.nonconverged;
    row["failed_trials"] = s.failed;
    row["slope_excluded"] = s.slope_excluded;
    row["length_strength_rho"] = opt(s.length_strength_rho);
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

void export_report(const std::vector<EvalSummary>& summaries, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create report directory " + dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
  };
  write(dir / "eval_report.csv", report_csv(summaries));
  write(dir / "eval_report.json", report_json(summaries));
}

}  // namespace bnexplain
