#include "doctest.h"

#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "abspm/error.hpp"
#include "abspm/io.hpp"
#include "abspm/server.hpp"
#include "abspm/xes.hpp"
#include "support/temp_dir.hpp"

using namespace abspm;
using namespace abspm::pipeline;

namespace {

Project seeded_project(const std::filesystem::path& root) {
    auto project = Project::init(root, default_state(42), false);
    simulate(project);
    convert(project);
    stats(project);
    filter(project);
    discover(project);
    return project;
}

ApiResponse call(ApiService& api, std::string method, std::string path, std::string body = {},
                 std::map<std::string, std::string> query = {}) {
    return api.handle(ApiRequest{std::move(method), std::move(path), std::move(query), std::move(body)});
}

Json body_of(const ApiResponse& r) {
    return Json::parse(r.body);
}

}  // namespace

TEST_CASE("server needs a converted log") {
    testsupport::TempDir dir;
    Project::init(dir.path(), default_state(), false);
    CHECK_THROWS_AS(ApiService(Project::open(dir.path())), PreconditionError);
}

TEST_CASE("GET /api/dfg at full ratios equals the exported full model") {
    testsupport::TempDir dir;
    auto project = seeded_project(dir.path());
    auto expected = read_file(dir.path() / project.entry("model_json").path);
    ApiService api(Project::open(dir.path()));

    auto r = call(api, "GET", "/api/dfg", {}, {{"activities", "1.0"}, {"paths", "1.0"}});
    CHECK(r.status == 200);
    CHECK(r.body == expected);

    auto smaller = body_of(call(api, "GET", "/api/dfg", {}, {{"activities", "1.0"}, {"paths", "0.15"}}));
    CHECK(smaller.at("edges").size() < body_of(r).at("edges").size());

    auto dot = call(api, "GET", "/api/dfg", {}, {{"metric", "absolute_frequency"}, {"format", "dot"}});
    CHECK(dot.status == 200);
    CHECK(dot.body.starts_with("digraph"));

    for (auto bad : std::vector<std::map<std::string, std::string>>{
             {{"activities", "x"}}, {{"paths", "1.5"}}, {{"activities", "0"}}, {{"metric", "nope"}},
             {{"secondary", "nope"}}, {{"mode", "nope"}}, {{"format", "svg"}}}) {
        auto e = call(api, "GET", "/api/dfg", {}, bad);
        CHECK(e.status == 400);
        CHECK(body_of(e).at("code") == "invalid_spec");
    }
}

TEST_CASE("POST /api/filter filters whole cases and returns the re-discovered model") {
    testsupport::TempDir dir;
    auto project = seeded_project(dir.path());
    auto log = eventlog::read_xes(dir.path() / project.entry("event_log_xes").path);
    ApiService api(Project::open(dir.path()));

    auto r = call(api, "POST", "/api/filter", R"({"preset":"paper-outlier"})");
    REQUIRE(r.status == 200);
    auto j = body_of(r);

    // every surviving case keeps all of its events
    auto filtered = eventlog::apply_filters(log, project.state().active_filter());
    std::size_t events = 0;
    for (const auto& t : log.traces) {
        if (eventlog::case_passes(t, project.state().active_filter())) events += t.events.size();
    }
    CHECK(j.at("stats").at("cases").get<std::size_t>() == filtered.traces.size());
    CHECK(j.at("stats").at("events").get<std::size_t>() == events);
    // same as what `abspm discover` wrote for the same filter
    CHECK(j.at("model").dump(2) + "\n" == read_file(dir.path() / project.entry("model_json").path));

    auto st = body_of(call(api, "GET", "/api/stats"));
    CHECK(st.at("source") == "preset:paper-outlier");
    CHECK(st.at("unfiltered").at("cases") == 280);

    auto custom = call(api, "POST", "/api/filter", R"({"max_events_per_case": 3})");
    REQUIRE(custom.status == 200);
    CHECK(body_of(custom).at("stats").at("events_per_case").at("max").get<int>() <= 3);

    CHECK(call(api, "POST", "/api/filter", "{nope").status == 400);
    CHECK(body_of(call(api, "POST", "/api/filter", "{nope")).at("code") == "invalid_json");
    CHECK(call(api, "POST", "/api/filter", R"({"max_events_per_case": -1})").status == 400);
    CHECK(call(api, "POST", "/api/filter", R"({"from": "yesterday"})").status == 400);
    CHECK(call(api, "POST", "/api/filter", R"({"colour": 1})").status == 400);
    CHECK(call(api, "POST", "/api/filter", R"({"preset": "missing"})").status == 400);
}

TEST_CASE("judgments flow into the report") {
    testsupport::TempDir dir;
    seeded_project(dir.path());
    ApiService api(Project::open(dir.path()));

    auto obs = body_of(call(api, "GET", "/api/observations"));
    CHECK(obs.at("population") == 280);
    CHECK(obs.at("questions").at("Q2").get<std::string>().find("280 agents") != std::string::npos);
    REQUIRE(obs.at("observations").size() >= 9);
    CHECK(obs.at("observations")[0].at("verdicts").at("Q1").is_null());

    auto r = call(api, "POST", "/api/judgments", R"({"obs_id":2,"question":"Q2","verdict":"not_plausible","note":"odd"})");
    CHECK(r.status == 200);
    auto report = body_of(call(api, "GET", "/api/report"));
    CHECK(report.at("rows")[1].at("Q2") == "not_plausible");
    CHECK(report.at("q2_counts").at("not_plausible") == 1);

    auto missing = call(api, "POST", "/api/judgments", R"({"obs_id":999,"question":"Q1","verdict":"plausible"})");
    CHECK(missing.status == 404);
    CHECK(body_of(missing).at("code") == "unknown_observation");
    CHECK(call(api, "POST", "/api/judgments", R"({"obs_id":1,"question":"Q1","verdict":"maybe"})").status == 400);
    CHECK(call(api, "POST", "/api/judgments", R"({"obs_id":1,"question":"Q9","verdict":"plausible"})").status == 400);
    CHECK(call(api, "POST", "/api/judgments", "[]").status == 400);

    // a mixed batch is all-or-nothing
    auto batch = call(api, "POST", "/api/judgments",
                      R"([{"obs_id":1,"question":"Q1","verdict":"plausible"},{"obs_id":999,"question":"Q1","verdict":"plausible"}])");
    CHECK(batch.status == 404);
    CHECK(body_of(call(api, "GET", "/api/report")).at("rows")[0].at("Q1").is_null());

    // persisted through the project's store
    CHECK(Project::open(dir.path()).load_judgments().size() == 1);
    ApiService restarted(Project::open(dir.path()));
    CHECK(body_of(call(restarted, "GET", "/api/report")).at("rows")[1].at("Q2") == "not_plausible");
}

TEST_CASE("reference verdicts over the API reproduce the fixture counts") {
    testsupport::TempDir dir;
    seeded_project(dir.path());
    ApiService api(Project::open(dir.path()));
    auto judgments = assessment::parse_verdict_csv(
        read_file(std::string(ABSPM_TEST_DATA_DIR) + "/reference_verdicts.csv"), "expert", "t");
    Json batch = Json::array();
    for (const auto& j : judgments) batch.push_back(Json::parse(assessment::judgment_to_json(j)));
    REQUIRE(call(api, "POST", "/api/judgments", batch.dump()).status == 200);
    auto report = body_of(call(api, "GET", "/api/report"));
    CHECK(report.at("q1_counts") == Json::parse(R"({"plausible":3,"not_plausible":3,"further_investigation":3})"));
    CHECK(report.at("q2_counts") == Json::parse(R"({"plausible":7,"not_plausible":1,"further_investigation":1})"));
    CHECK(report.at("discrepancies") == Json::parse("[1,2,4,8,9]"));
}

TEST_CASE("routing errors") {
    testsupport::TempDir dir;
    seeded_project(dir.path());
    ApiService api(Project::open(dir.path()));
    CHECK(call(api, "GET", "/api/nothing").status == 404);
    CHECK(call(api, "POST", "/api/stats").status == 405);
    CHECK(call(api, "GET", "/api/judgments").status == 405);
    auto e = body_of(call(api, "DELETE", "/api/report"));
    CHECK(e.at("code") == "method_not_allowed");
    CHECK(e.at("message").is_string());
}

TEST_CASE("endpoints answer over HTTP and serve static assets") {
    testsupport::TempDir dir;
    seeded_project(dir.path());
    std::filesystem::create_directories(dir.path() / "ui");
    write_file_atomic(dir.path() / "ui" / "index.html", "<html>explorer</html>");

    ApiService api(Project::open(dir.path()));
    HttpServer server(api, dir.path() / "ui");
    int port = server.bind("127.0.0.1", 0);
    std::thread worker([&] { server.run(); });

    httplib::Client client("127.0.0.1", port);
    auto stats = client.Get("/api/stats");
    REQUIRE(stats);
    CHECK(stats->status == 200);
    CHECK(stats->get_header_value("Content-Type") == "application/json");

    auto same1 = client.Get("/api/dfg?activities=0.5&paths=0.5");
    auto same2 = client.Get("/api/dfg?activities=0.5&paths=0.5");
    REQUIRE(same1);
    REQUIRE(same2);
    CHECK(same1->body == same2->body);

    auto bad = client.Get("/api/dfg?metric=nope");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    auto post = client.Post("/api/judgments", R"({"obs_id":1,"question":"Q1","verdict":"plausible"})",
                            "application/json");
    REQUIRE(post);
    CHECK(post->status == 200);
    auto unknown = client.Post("/api/judgments", R"({"obs_id":404,"question":"Q1","verdict":"plausible"})",
                               "application/json");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);

    auto index = client.Get("/index.html");
    REQUIRE(index);
    CHECK(index->body == "<html>explorer</html>");

    // concurrent readers and writers
    std::vector<std::thread> clients;
    for (int i = 0; i < 4; ++i) {
        clients.emplace_back([port, i] {
            httplib::Client c("127.0.0.1", port);
            for (int k = 0; k < 5; ++k) {
                c.Get("/api/report");
                c.Post("/api/judgments",
                       fmt::format(R"({{"obs_id":{},"question":"Q2","verdict":"plausible"}})", (i + k) % 9 + 1),
                       "application/json");
            }
        });
    }
    for (auto& t : clients) t.join();

    server.stop();
    worker.join();
    auto store = Project::open(dir.path()).load_judgments();
    CHECK(store.audit().size() == 21);
    CHECK(store.size() == 9);  // Q1 of obs 1 plus Q2 of obs 1..8
}
