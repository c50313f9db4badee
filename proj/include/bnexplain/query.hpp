#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bnexplain/argument_search.hpp"
#include "bnexplain/network.hpp"
#include "bnexplain/nlg.hpp"

namespace bnexplain {

using Json = nlohmann::ordered_json;

/// {name, variables:[{name,states}], edges:[[parent,child]],
///  cpts:[{child,parents,table}]}; tables use the factor layout with scope
/// parents + child.
Json network_to_json(const BayesianNetwork& bn);

/// Nodes with prior marginals and layer/order layout hints, plus edges.
Json graph_to_json(const BayesianNetwork& bn, const FactorGraph& fg);

Json explanation_to_json(const Explanation& e);

struct QueryRequest {
  std::vector<std::pair<std::string, std::string>> evidence;
  std::string target;
  FaParams params;
  std::vector<Mode> modes{Mode::kDirect};
  bool include_trace = true;
  bool include_graph = false;
};

/// Reads {evidence:{name:state}|[{variable,state}], target, mode|modes,
/// params:{ml,mc,dt,top_n,min_strength}, include_trace, include_graph}.
/// "ml"/"mc" accept null or "inf" for unbounded. Evidence keeps the order
/// in which it appears in the body.
QueryRequest parse_query_request(const Json& body);

/// Shared by the CLI and the HTTP service. `budget` bounds the argument
/// search; exceeding it raises CapacityError.
Json run_query(const BayesianNetwork& bn, const FactorGraph& fg, const QueryRequest& request,
               std::optional<std::chrono::milliseconds> budget = std::nullopt);

/// Plain-text report: posterior summary, then one explanation per argument
/// for each requested mode, separated by blank lines.
std::string render_query_text(const Json& response);

}  // namespace bnexplain
