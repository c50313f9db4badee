#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnexplain/bif.hpp"
#include "bnexplain/errors.hpp"
#include "bnexplain/eval.hpp"
#include "bnexplain/query.hpp"
#include "bnexplain/service.hpp"

namespace fs = std::filesystem;
using namespace bnexplain;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;

std::size_t parse_bound(const std::string& text, const char* flag) {
  if (text == "inf" || text == "unbounded") return kUnbounded;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(text, &pos);
    if (pos == text.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ValidationError(std::string(flag) + " expects a positive integer or 'inf', got '" + text + "'");
}

fs::path resolve_network(const std::string& arg) {
  fs::path p(arg);
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("FA_MODEL_DIR")) {
    for (fs::path candidate : {fs::path(dir) / p, fs::path(dir) / (arg + ".bif")}) {
      if (fs::exists(candidate)) return candidate;
    }
  }
  throw ValidationError("network file '" + arg + "' not found");
}

std::vector<fs::path> collect_networks(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& arg : args) {
    std::size_t start = 0;
    while (start <= arg.size()) {
      std::size_t end = arg.find(',', start);
      if (end == std::string::npos) end = arg.size();
      std::string item = arg.substr(start, end - start);
      start = end + 1;
      if (item.empty()) continue;
      fs::path p = fs::is_directory(item) ? fs::path(item) : resolve_network(item);
      if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(p)) {
          if (e.is_regular_file() && e.path().extension() == ".bif") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        out.insert(out.end(), files.begin(), files.end());
      } else {
        out.push_back(p);
      }
    }
  }
  if (out.empty()) throw ValidationError("no .bif networks found");
  return out;
}

struct ExplainOptions {
  std::string network;
  std::vector<std::string> evidence;
  std::string target;
  std::string mode = "direct";
  std::string mc = "2";
  std::string ml = "inf";
  double dt = 0.1;
  std::string top_n = "inf";
  double min_strength = 0.0;
  bool json = false;
};

int run_explain(const ExplainOptions& o) {
  BayesianNetwork bn = load_bif_file(resolve_network(o.network));
  FactorGraph fg(bn);
  QueryRequest request;
  request.target = o.target;
  for (const auto& item : o.evidence) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("evidence '" + item + "' must look like Name=state");
    request.evidence.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  request.modes = {parse_mode(o.mode)};
  request.params.mc = parse_bound(o.mc, "--mc");
  request.params.ml = parse_bound(o.ml, "--ml");
  request.params.top_n = parse_bound(o.top_n, "--top-n");
  request.params.dt = o.dt;
  request.params.min_strength = o.min_strength;
  Json response = run_query(bn, fg, request);
  if (o.json) {
    std::cout << response.dump(2) << "\n";
  } else {
    std::cout << render_query_text(response);
  }
  return 0;
}

struct EvalOptions {
  std::vector<std::string> networks;
  std::size_t trials = 200;
  std::string mc = "2";
  std::uint64_t seed_base = 0;
  std::size_t threads = 0;
  std::string out = "eval_out";
};

int run_eval(const EvalOptions& o) {
  TrialConfig config;
  config.params.mc = parse_bound(o.mc, "--mc");
  config.seed_base = o.seed_base;
  config.threads = o.threads;
  std::vector<EvalSummary> summaries;
  for (const auto& path : collect_networks(o.networks)) {
    BayesianNetwork bn = load_bif_file(path);
    summaries.push_back(summarize(bn, run_trials(bn, o.trials, config)));
  }
  export_report(summaries, o.out);
  std::cout << report_csv(summaries);
  return 0;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_dir;
  double budget_s = 30.0;
};

int run_serve(const ServeOptions& o) {
  Service service(std::chrono::milliseconds(static_cast<long long>(o.budget_s * 1000.0)));
  std::string dir = o.model_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("FA_MODEL_DIR")) dir = env;
  }
  if (!dir.empty()) service.load_directory(dir);
  std::fprintf(stderr, "serving %zu network(s) on http://%s:%d\n", service.ids().size(), o.host.c_str(), o.port);
  if (!serve(service, o.host, o.port)) {
    std::fprintf(stderr, "error: cannot listen on %s:%d\n", o.host.c_str(), o.port);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-argument explanations for discrete Bayesian networks"};
  app.require_subcommand(1);

  ExplainOptions ex;
  auto* explain = app.add_subcommand("explain", "Explain a posterior query");
  explain->add_option("--network", ex.network, "BIF file, or a name under FA_MODEL_DIR")->required();
  explain->add_option("--evidence", ex.evidence, "Observation as Name=state (repeatable)");
  explain->add_option("--target", ex.target, "Target variable")->required();
  explain->add_option("--mode", ex.mode, "overview, direct or contrastive")->capture_default_str();
  explain->add_option("--mc", ex.mc, "Most paths combined, or inf")->capture_default_str();
  explain->add_option("--ml", ex.ml, "Longest path in variable hops, or inf")->capture_default_str();
  explain->add_option("--dt", ex.dt, "Dependence threshold")->capture_default_str();
  explain->add_option("--top-n", ex.top_n, "Most arguments shown, or inf")->capture_default_str();
  explain->add_option("--min-strength", ex.min_strength, "Hide arguments weaker than this")->capture_default_str();
  explain->add_flag("--json", ex.json, "Print the full response as JSON");

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Run randomized approximation trials");
  eval->add_option("--networks", ev.networks, "Directories, files or comma lists")->required();
  eval->add_option("--trials", ev.trials, "Trials per network")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--mc", ev.mc, "Most paths combined, or inf")->capture_default_str();
  eval->add_option("--seed-base", ev.seed_base, "Seed of the first trial")->capture_default_str();
  eval->add_option("--threads", ev.threads, "Worker threads (0 = all cores)")->capture_default_str();
  eval->add_option("--out", ev.out, "Report directory")->capture_default_str();

  ServeOptions sv;
  auto* srv = app.add_subcommand("serve", "Start the HTTP service");
  srv->add_option("--host", sv.host)->capture_default_str();
  srv->add_option("--port", sv.port)->capture_default_str();
  srv->add_option("--model-dir", sv.model_dir, "Defaults to FA_MODEL_DIR");
  srv->add_option("--budget-s", sv.budget_s, "Per-query time budget in seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*explain) return run_explain(ex);
    if (*eval) return run_eval(ev);
    return run_serve(sv);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
