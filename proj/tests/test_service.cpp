#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sys/wait.h>
#include <thread>

#include <httplib.h>

#include "bnexplain/bif.hpp"
#include "bnexplain/service.hpp"
#include "support.hpp"

namespace bnexplain {
namespace {

struct CliResult {
  int status;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(BNEXPLAIN_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string asia_path() { return "'" + (testing::data_dir() / "networks" / "asia.bif").string() + "'"; }

Json without_timing(Json j) {
  j.erase("timing");
  return j;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { service.load_directory(testing::data_dir() / "networks"); }

  ApiResponse query(const std::string& id, const Json& body) {
    return service.handle("POST", "/networks/" + id + "/query", body.dump());
  }

  Service service;
  const Json lung_query = {{"evidence", {{"XRay Result", "abnormal"}, {"Tuberculosis", "absent"}}},
                           {"target", "Lung Cancer"},
                           {"modes", {"overview", "direct", "contrastive"}}};
};

TEST_F(ServiceTest, HealthAndListing) {
  auto h = service.handle("GET", "/health", "");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(h.body["status"], "ok");
  auto l = service.handle("GET", "/networks", "");
  EXPECT_EQ(l.status, 200);
  auto ids = l.body["ids"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(ids.begin(), ids.end(), "asia"), ids.end());
}

TEST_F(ServiceTest, NetworkAndGraph) {
  auto n = service.handle("GET", "/networks/asia", "");
  ASSERT_EQ(n.status, 200);
  EXPECT_EQ(n.body["id"], "asia");
  EXPECT_EQ(n.body["variables"].size(), 8u);
  EXPECT_EQ(n.body["edges"].size(), 8u);
  auto g = service.handle("GET", "/networks/asia/graph", "");
  ASSERT_EQ(g.status, 200);
  EXPECT_EQ(g.body["nodes"].size(), 8u);
  for (const auto& node : g.body["nodes"]) {
    double total = 0;
    for (double p : node["prior"]) total += p;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST_F(ServiceTest, QueryReturnsRankedExplanations) {
  auto r = query("asia", lung_query);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto& top = r.body["arguments"][0];
  EXPECT_EQ(top["rank"], 1);
  EXPECT_EQ(top["argued_state"], "present");
  EXPECT_EQ(top["explanations"]["overview"]["text"],
            "Since <XRay Result> is <abnormal> and <Tuberculosis> is <absent>, we infer that <Lung Cancer> = "
            "<present>.");
  EXPECT_EQ(top["explanations"]["direct"]["plain_text"].get<std::string>().find('<'), std::string::npos);
  EXPECT_NEAR(r.body["approximate"]["present"].get<double>(), 0.5329, 5e-5);
  EXPECT_TRUE(r.body.contains("timing"));
  EXPECT_FALSE(r.body.contains("graph"));
}

TEST_F(ServiceTest, EvidenceAsArrayAndParams) {
  Json body = {{"evidence", Json::array({{{"variable", "Smoking"}, {"state", "smoker"}}})},
               {"target", "Dyspnea"},
               {"params", {{"mc", "inf"}, {"ml", nullptr}, {"top_n", 1}}},
               {"include_trace", false},
               {"include_graph", true}};
  auto r = query("asia", body);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_LE(r.body["arguments"].size(), 1u);
  EXPECT_TRUE(r.body.contains("graph"));
  EXPECT_FALSE(r.body["arguments"][0].contains("trace"));
}

TEST_F(ServiceTest, EmptyEvidenceReturnsPrior) {
  auto r = query("asia", {{"target", "Lung Cancer"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(r.body["arguments"].empty());
  EXPECT_EQ(r.body["approximate"], r.body["prior"]);
}

TEST_F(ServiceTest, ErrorsCarryCodes) {
  auto expect_error = [](const ApiResponse& r, int status, const std::string& code) {
    EXPECT_EQ(r.status, status) << r.body.dump();
    EXPECT_EQ(r.body["code"], code);
    EXPECT_TRUE(r.body.contains("message"));
    EXPECT_TRUE(r.body.contains("detail"));
  };
  expect_error(service.handle("GET", "/networks/nope", ""), 404, "not_found");
  expect_error(service.handle("GET", "/elsewhere", ""), 404, "not_found");
  expect_error(service.handle("POST", "/networks/asia/query", "{not json"), 400, "validation_error");
  expect_error(query("asia", {{"target", "Nope"}}), 400, "validation_error");
  expect_error(query("asia", {{"target", "Smoking"}, {"evidence", {{"Smoking", "smoker"}}}}), 400,
               "validation_error");
  expect_error(query("asia", {{"target", "Smoking"}, {"evidence", {{"Dyspnea", "maybe"}}}}), 400,
               "validation_error");
  expect_error(query("asia", {{"target", "Smoking"}, {"params", {{"dt", -1}}}}), 400, "validation_error");
  expect_error(query("asia", {{"target", "Smoking"}, {"include_graph", "yes"}}), 400, "validation_error");
  expect_error(query("asia", {{"target", "Smoking"}, {"mode", "verbose"}}), 400, "validation_error");
  service.add(testing::fixture("and_gate"), "and");
  expect_error(query("and", {{"target", "B"}, {"evidence", {{"A", "0"}, {"C", "1"}}}}), 400, "validation_error");
  expect_error(query("alarm", {{"target", "HR"},
                               {"evidence", {{"CVP", "HIGH"}, {"BP", "LOW"}, {"VENTLUNG", "ZERO"}}},
                               {"params", {{"mc", "inf"}}}}),
               422, "capacity_exceeded");
}

TEST_F(ServiceTest, UploadRegistersNetworks) {
  std::ifstream in(testing::data_dir() / "fixtures" / "chain.bif");
  std::string bif(std::istreambuf_iterator<char>(in), {});
  auto raw = service.handle("POST", "/networks", bif);
  ASSERT_EQ(raw.status, 201) << raw.body.dump();
  auto wrapped = service.handle("POST", "/networks", Json{{"bif", bif}}.dump());
  ASSERT_EQ(wrapped.status, 201);
  EXPECT_NE(raw.body["id"], wrapped.body["id"]);
  auto got = service.handle("GET", "/networks/" + raw.body["id"].get<std::string>(), "");
  EXPECT_EQ(got.status, 200);
  EXPECT_EQ(got.body["variables"].size(), 3u);
  EXPECT_EQ(service.handle("POST", "/networks", "variable {").status, 400);
  EXPECT_EQ(service.handle("POST", "/networks", R"({"bif": 3})").status, 400);
}

TEST_F(ServiceTest, HttpServerMatchesHandlerAndCli) {
  httplib::Server server;
  service.mount(server);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto missing = client.Get("/networks/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  Json body = {{"evidence", {{"XRay Result", "abnormal"}, {"Tuberculosis", "absent"}}}, {"target", "Lung Cancer"}};
  auto http = client.Post("/networks/asia/query", body.dump(), "application/json");
  ASSERT_TRUE(http);
  ASSERT_EQ(http->status, 200);
  Json over_http = Json::parse(http->body);
  server.stop();
  worker.join();

  EXPECT_EQ(without_timing(over_http), without_timing(query("asia", body).body));
  auto cli = run_cli("explain --network " + asia_path() +
                     " --evidence 'XRay Result=abnormal' --evidence 'Tuberculosis=absent' --target 'Lung Cancer' --json");
  ASSERT_EQ(cli.status, 0);
  EXPECT_EQ(without_timing(Json::parse(cli.out)), without_timing(over_http));
}

TEST(Cli, PlainTextAndExitCodes) {
  auto ok = run_cli("explain --network " + asia_path() +
                    " --evidence 'XRay Result=abnormal' --evidence 'Tuberculosis=absent' --target 'Lung Cancer'"
                    " --mode overview --top-n 1");
  EXPECT_EQ(ok.status, 0);
  EXPECT_NE(ok.out.find("we infer that <Lung Cancer> = <present>."), std::string::npos);
  EXPECT_EQ(run_cli("explain --network " + asia_path() + " --evidence 'XRay Result=weird' --target Smoking").status, 2);
  EXPECT_EQ(run_cli("explain --network /no/such.bif --target Smoking").status, 2);
  EXPECT_EQ(run_cli("explain --network " + asia_path()).status, 2);
  EXPECT_EQ(run_cli("explain --network " + asia_path() + " --target Smoking --mc 0").status, 2);
  auto alarm = "'" + (testing::data_dir() / "networks" / "alarm.bif").string() + "'";
  EXPECT_EQ(run_cli("explain --network " + alarm +
                    " --evidence CVP=HIGH --evidence BP=LOW --evidence VENTLUNG=ZERO --target HR --mc inf")
                .status,
            3);
}

TEST(Cli, EvalWritesReports) {
  auto dir = std::filesystem::temp_directory_path() / "bnexplain_cli_eval";
  std::filesystem::remove_all(dir);
  auto r = run_cli("eval --networks '" + (testing::data_dir() / "fixtures" / "chain.bif").string() +
                   "' --trials 5 --threads 1 --out '" + dir.string() + "'");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("network,nodes,treewidth_est,", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "eval_report.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval_report.json"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace bnexplain
