#include "bnexplain/service.hpp"

#include <algorithm>

#include <httplib.h>

#include "bnexplain/bif.hpp"
#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

ApiResponse error(int status, const std::string& code, const std::string& message, const std::string& detail) {
  return {status, Json{{"code", code}, {"message", message}, {"detail", detail}}};
}

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) out.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

Service::Service(std::chrono::milliseconds budget) : budget_(budget) {}

void Service::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("model directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bif") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) add(load_bif_file(f), f.stem().string());
}

std::string Service::add(BayesianNetwork bn, std::optional<std::string> id) {
  auto entry = std::make_shared<const Entry>(Entry{bn, FactorGraph(bn)});
  std::lock_guard lock(mutex_);
  std::string key;
  if (id) {
    key = *id;
    if (key.empty() || key.find('/') != std::string::npos) throw ValidationError("invalid network id '" + key + "'");
    if (registry_.count(key)) throw ValidationError("network id '" + key + "' is already registered");
  } else {
    do {
      key = "net-" + std::to_string(++counter_);
    } while (registry_.count(key));
  }
  registry_.emplace(key, std::move(entry));
  return key;
}

std::vector<std::string> Service::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, v] : registry_) out.push_back(k);
  return out;
}

std::shared_ptr<const Service::Entry> Service::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = registry_.find(id);
  return it == registry_.end() ? nullptr : it->second;
}

ApiResponse Service::upload(const std::string& body) {
  std::string text = body;
  auto parsed = nlohmann::json::parse(body, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object()) {
    if (!parsed.contains("bif") || !parsed["bif"].is_string()) {
      throw ValidationError("JSON uploads need a string \"bif\" field");
    }
    text = parsed["bif"].get<std::string>();
  }
  std::string id = add(parse_bif(text, "uploaded"));
  return {201, Json{{"id", id}}};
}

ApiResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  auto parts = segments(path);
  try {
    if (method == "GET" && parts == std::vector<std::string>{"health"}) {
      return {200, Json{{"status", "ok"}}};
    }
    if (!parts.empty() && parts[0] == "networks") {
      if (parts.size() == 1 && method == "POST") return upload(body);
      if (parts.size() == 1 && method == "GET") return {200, Json{{"ids", ids()}}};
      if (parts.size() >= 2 && parts.size() <= 3) {
        auto entry = find(parts[1]);
        if (!entry) return error(404, "not_found", "unknown network id", parts[1]);
        if (parts.size() == 2 && method == "GET") {
          Json out = network_to_json(entry->bn);
          out["id"] = parts[1];
          return {200, out};
        }
        if (parts.size() == 3 && parts[2] == "graph" && method == "GET") {
          return {200, graph_to_json(entry->bn, entry->fg)};
        }
        if (parts.size() == 3 && parts[2] == "query" && method == "POST") {
          auto json = Json::parse(body, nullptr, false);
          if (json.is_discarded()) return error(400, "validation_error", "request body is not valid JSON", "");
          QueryRequest request = parse_query_request(json);
          return {200, run_query(entry->bn, entry->fg, request, budget_)};
        }
      }
    }
    return error(404, "not_found", "no such route", method + " " + path);
  } catch (const ValidationError& e) {
    return error(400, "validation_error", "invalid request", e.what());
  } catch (const NumericError& e) {
    return error(400, "validation_error", "evidence cannot be explained", e.what());
  } catch (const CapacityError& e) {
    return error(422, "capacity_exceeded", "query exceeded its search budget", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal_error", "unexpected failure", e.what());
  }
}

void Service::mount(httplib::Server& server) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
}

bool serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  return server.listen(host, port);
}

}  // namespace bnexplain
