#include "bnexplain/query.hpp"

#include <cmath>
#include <cstdio>

#include "bnexplain/errors.hpp"
#include "bnexplain/inference.hpp"

namespace bnexplain {

namespace {

constexpr std::size_t kExactQueryLimit = 25;

Json distribution(const BeliefUpdate& u) {
  Json out = Json::object();
  for (std::size_t i = 0; i < u.size(); ++i) out[u.variable().states[i]] = u[i];
  return out;
}

Json real_or_sentinel(double v) {
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  if (std::isnan(v)) return nullptr;
  return v;
}

std::size_t bound(const Json& v, const char* what) {
  if (v.is_null() || (v.is_string() && (v == "inf" || v == "Infinity"))) return kUnbounded;
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError(std::string(what) + " must be a positive integer, null or \"inf\"");
  }
  return v.get<std::size_t>();
}

double real(const Json& v, const char* what) {
  if (!v.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return v.get<double>();
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string distribution_text(const Json& d) {
  std::string out;
  for (auto it = d.begin(); it != d.end(); ++it) {
    if (!out.empty()) out += ", ";
    out += it.key() + " " + fixed(it.value().get<double>());
  }
  return out;
}

}  // namespace

Json network_to_json(const BayesianNetwork& bn) {
  Json out;
  out["name"] = bn.name();
  out["variables"] = Json::array();
  for (const auto& v : bn.variables()) out["variables"].push_back({{"name", v->name}, {"states", v->states}});
  out["edges"] = Json::array();
  for (const auto& [p, c] : bn.edges()) out["edges"].push_back({bn.variable(p)->name, bn.variable(c)->name});
  out["cpts"] = Json::array();
  for (std::size_t i = 0; i < bn.size(); ++i) {
    Json parents = Json::array();
    for (std::size_t p : bn.parents(i)) parents.push_back(bn.variable(p)->name);
    const Factor& f = bn.cpt(i);
    out["cpts"].push_back({{"child", bn.variable(i)->name},
                           {"parents", parents},
                           {"table", std::vector<double>(f.values().begin(), f.values().end())}});
  }
  return out;
}

Json graph_to_json(const BayesianNetwork& bn, const FactorGraph& fg) {
  std::vector<std::size_t> layer(bn.size(), 0);
  for (std::size_t v : bn.topological_order()) {
    for (std::size_t p : bn.parents(v)) layer[v] = std::max(layer[v], layer[p] + 1);
  }
  std::vector<std::size_t> per_layer(bn.size(), 0);
  Json nodes = Json::array();
  for (std::size_t v = 0; v < bn.size(); ++v) {
    Json node;
    node["id"] = v;
    node["name"] = bn.variable(v)->name;
    node["states"] = bn.variable(v)->states;
    try {
      node["prior"] = distribution(prior_marginal(fg, v).marginal);
    } catch (const NumericError&) {
      node["prior"] = nullptr;
    }
    node["layer"] = layer[v];
    node["order"] = per_layer[layer[v]]++;
    nodes.push_back(std::move(node));
  }
  Json edges = Json::array();
  for (const auto& [p, c] : bn.edges()) {
    edges.push_back({{"from", bn.variable(p)->name}, {"to", bn.variable(c)->name}});
  }
  Json out;
  out["network"] = bn.name();
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  return out;
}

Json explanation_to_json(const Explanation& e) {
  Json steps = Json::array();
  for (const auto& s : e.sentences) {
    Json premises = Json::array();
    for (const auto& p : s.premises) {
      premises.push_back({{"variable", p.variable}, {"state", p.state}, {"observed", p.observed}});
    }
    Json step;
    step["kind"] = s.kind;
    step["premises"] = std::move(premises);
    step["verb"] = s.verb;
    step["conclusion"] = s.conclusion.empty() ? Json(nullptr) : Json({{"variable", s.conclusion}, {"state", s.state}});
    step["qualifier"] = s.qualifier ? Json(*s.qualifier) : Json(nullptr);
    step["text"] = s.text;
    steps.push_back(std::move(step));
  }
  Json out;
  out["mode"] = to_string(e.mode);
  out["steps"] = std::move(steps);
  out["text"] = e.text;
  out["plain_text"] = strip_markup(e.text);
  return out;
}

QueryRequest parse_query_request(const Json& body) {
  if (!body.is_object()) throw ValidationError("query body must be a JSON object");
  QueryRequest r;
  if (!body.contains("target") || !body["target"].is_string()) {
    throw ValidationError("query needs a string \"target\"");
  }
  r.target = body["target"].get<std::string>();
  if (body.contains("evidence")) {
    const auto& ev = body["evidence"];
    if (ev.is_object()) {
      for (auto it = ev.begin(); it != ev.end(); ++it) {
        if (!it.value().is_string()) throw ValidationError("evidence state for '" + it.key() + "' must be a string");
        r.evidence.emplace_back(it.key(), it.value().get<std::string>());
      }
    } else if (ev.is_array()) {
      for (const auto& item : ev) {
        if (!item.is_object() || !item.contains("variable") || !item.contains("state") ||
            !item["variable"].is_string() || !item["state"].is_string()) {
          throw ValidationError("evidence entries need string \"variable\" and \"state\"");
        }
        r.evidence.emplace_back(item["variable"].get<std::string>(), item["state"].get<std::string>());
      }
    } else if (!ev.is_null()) {
      throw ValidationError("evidence must be an object or an array");
    }
  }
  if (body.contains("modes")) {
    if (!body["modes"].is_array() || body["modes"].empty()) throw ValidationError("modes must be a nonempty array");
    r.modes.clear();
    for (const auto& m : body["modes"]) {
      if (!m.is_string()) throw ValidationError("modes must be strings");
      r.modes.push_back(parse_mode(m.get<std::string>()));
    }
  } else if (body.contains("mode")) {
    if (!body["mode"].is_string()) throw ValidationError("mode must be a string");
    r.modes = {parse_mode(body["mode"].get<std::string>())};
  }
  if (body.contains("params")) {
    const auto& p = body["params"];
    if (!p.is_object()) throw ValidationError("params must be an object");
    if (p.contains("ml")) r.params.ml = bound(p["ml"], "ml");
    if (p.contains("mc")) r.params.mc = bound(p["mc"], "mc");
    if (p.contains("dt")) r.params.dt = real(p["dt"], "dt");
    if (p.contains("top_n")) r.params.top_n = bound(p["top_n"], "top_n");
    if (p.contains("min_strength")) r.params.min_strength = real(p["min_strength"], "min_strength");
  }
  for (auto [key, flag] : {std::pair{"include_trace", &r.include_trace}, std::pair{"include_graph", &r.include_graph}}) {
    if (!body.contains(key)) continue;
    if (!body[key].is_boolean()) throw ValidationError(std::string(key) + " must be a boolean");
    *flag = body[key].get<bool>();
  }
  r.params.validate();
  return r;
}

Json run_query(const BayesianNetwork& bn, const FactorGraph& fg, const QueryRequest& request,
               std::optional<std::chrono::milliseconds> budget) {
  const std::size_t target = bn.require_index(request.target);
  Evidence evidence = Evidence::from_names(bn, request.evidence);
  evidence.check_target(bn, target);
  FaParams params = request.params;
  params.validate();
  if (budget) params.deadline = std::chrono::steady_clock::now() + *budget;

  // Message passing cannot tell impossible evidence apart; elimination can.
  std::optional<BeliefUpdate> exact;
  if (bn.size() <= kExactQueryLimit) exact = exact_posterior(bn, evidence, target);
  LoopyResult prior = prior_marginal(fg, target);
  LoopyResult posterior = loopy_posterior(fg, evidence, target);

  auto start = std::chrono::steady_clock::now();
  std::vector<RankedFa> fas;
  if (!evidence.empty()) fas = find_maximal_proper_fas(bn, fg, target, evidence, params);
  BeliefUpdate approx = approximate_posterior(prior.marginal, fas);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json out;
  out["network"] = bn.name();
  out["target"] = request.target;
  out["evidence"] = Json::array();
  for (const auto& o : evidence.observations()) {
    out["evidence"].push_back({{"variable", bn.variable(o.variable)->name},
                               {"state", bn.variable(o.variable)->states[o.state]}});
  }
  out["prior"] = distribution(prior.marginal);
  out["posterior"] = distribution(posterior.marginal);
  out["converged"] = posterior.converged;
  if (exact) out["exact"] = distribution(*exact);
  out["approximate"] = distribution(approx);
  out["summary"] = render_baseline_summary(prior.marginal, posterior.marginal);

  Json args = Json::array();
  for (std::size_t i = 0; i < fas.size(); ++i) {
    const RankedFa& fa = fas[i];
    Json a;
    a["rank"] = i + 1;
    a["encoding"] = fa.encoding;
    a["strength"] = real_or_sentinel(fa.strength);
    a["certain"] = std::isinf(fa.strength);
    a["argued_state"] = bn.variable(target)->states[fa.argued_state];
    a["length"] = fa.argument.length(fg);
    Json sources = Json::array(), nodes = Json::array(), edges = Json::array();
    for (NodeId n : fa.argument.sources()) sources.push_back(fg.name(n));
    for (NodeId n : fa.argument.nodes()) nodes.push_back(fg.name(n));
    for (const auto& e : fa.argument.edges()) edges.push_back({fg.name(e.from), fg.name(e.to)});
    a["sources"] = std::move(sources);
    a["nodes"] = std::move(nodes);
    a["edges"] = std::move(edges);
    a["effect"] = distribution(fa.effect);
    if (request.include_trace) {
      Json trace = Json::array();
      for (const auto& step : fa.trace.steps) {
        Json premises = Json::array();
        for (NodeId p : step.premises) premises.push_back(fg.name(p));
        trace.push_back({{"factor", fg.name(step.factor)},
                         {"conclusion", fg.name(step.conclusion)},
                         {"premises", std::move(premises)},
                         {"pattern", to_string(classify_step(bn, fg, step))},
                         {"effect", distribution(step.effect)}});
      }
      a["trace"] = std::move(trace);
    }
    Json explanations = Json::object();
    for (Mode m : request.modes) explanations[to_string(m)] = explanation_to_json(render(bn, fg, fa, m, evidence));
    a["explanations"] = std::move(explanations);
    args.push_back(std::move(a));
  }
  out["arguments"] = std::move(args);
  if (request.include_graph) out["graph"] = graph_to_json(bn, fg);
  out["timing"] = {{"search_s", seconds}};
  return out;
}

std::string render_query_text(const Json& response) {
  std::string out;
  const std::string target = response["target"].get<std::string>();
  out += "Target <" + target + ">\n";
  out += "Prior: " + distribution_text(response["prior"]) + "\n";
  out += "Posterior: " + distribution_text(response["posterior"]) + "\n";
  out += "Approximate posterior: " + distribution_text(response["approximate"]) + "\n";
  out += response["summary"].get<std::string>() + "\n";
  for (const auto& a : response["arguments"]) {
    for (auto it = a["explanations"].begin(); it != a["explanations"].end(); ++it) {
      out += "\n" + it.value()["text"].get<std::string>() + "\n";
    }
  }
  return out;
}

}  // namespace bnexplain
