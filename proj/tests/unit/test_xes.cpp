#include "doctest.h"

#include <filesystem>
#include <random>

#include "abspm/error.hpp"
#include "abspm/xes.hpp"
#include "support/random_logs.hpp"

using namespace abspm;
using namespace abspm::eventlog;

namespace {
const Date kBase{std::chrono::year{2023}, std::chrono::October, std::chrono::day{17}};
}

TEST_CASE("empty log is a valid document with zero traces") {
    EventLog empty;
    std::string xml = to_xes(empty);
    CHECK(xml.find("<trace>") == std::string::npos);
    CHECK(xml.find("<log xes.version=\"1.0\"") != std::string::npos);
    auto back = parse_xes(xml);
    CHECK(back == empty);
    CHECK(to_xes(back) == xml);
}

TEST_CASE("writer layout for a converted event") {
    EventLog log;
    log.meta.name = "schelling";
    log.meta.base_date = kBase;
    Trace t{"271", {{"move_location", at_midnight(kBase), {{"step", "int", "0", {}}, {"step_counter", "int", "1", {}}}}},
            {}};
    log.traces.push_back(t);
    std::string xml = to_xes(log);
    CHECK(xml.find(R"(    <string key="concept:name" value="271"/>)") != std::string::npos);
    CHECK(xml.find(R"(      <string key="concept:name" value="move_location"/>)") != std::string::npos);
    CHECK(xml.find(R"(      <date key="time:timestamp" value="2023-10-17T00:00:00.000+00:00"/>)") != std::string::npos);
    CHECK(xml.find(R"(      <int key="step_counter" value="1"/>)") != std::string::npos);
    CHECK(xml.find(R"(<string key="abspm:base_date" value="2023-10-17"/>)") != std::string::npos);
}

TEST_CASE("hand-written three-event file") {
    auto log = read_xes(std::filesystem::path(ABSPM_TEST_DATA_DIR) / "three_events.xes");
    CHECK(log.meta.name == "handmade");
    REQUIRE(log.extensions.size() == 1);
    CHECK(log.extensions[0].prefix == "org");
    REQUIRE(log.traces.size() == 2);
    const Trace& a = log.traces[0];
    CHECK(a.case_id == "271");
    REQUIRE(a.events.size() == 2);
    CHECK(a.events[0].activity == "move_location");
    CHECK(a.events[0].timestamp == at_midnight(kBase));
    REQUIRE(a.events[0].attributes.size() == 2);
    CHECK(a.events[0].attributes[0] == Attribute{"step_counter", "int", "4", {}});
    CHECK(a.events[0].attributes[1] == Attribute{"org:resource", "string", "grid & co", {}});
    CHECK(a.events[1].activity == "change_happy_2_2");
    CHECK(a.events[1].timestamp == at_midnight(kBase));
    const Trace& b = log.traces[1];
    CHECK(b.case_id == "86");
    REQUIRE(b.events.size() == 1);
    CHECK(b.events[0].timestamp ==
          at_midnight(add_days(kBase, 1)) + std::chrono::hours{12} + std::chrono::minutes{30} +
              std::chrono::milliseconds{250});
    CHECK(b.events[0].attributes[0] == Attribute{"distance", "float", "2.5", {}});
    CHECK(parse_xes(to_xes(log)) == log);
}

TEST_CASE("reader reports the first violation with its line") {
    auto expect_error = [](const std::string& xml, const std::string& fragment) {
        try {
            parse_xes(xml);
            FAIL("expected ParseError for " << fragment);
        } catch (const ParseError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
        }
    };
    expect_error("<events/>", "line 1: <events>: root element must be <log>");
    expect_error("<log>\n<trace>\n<event>\n<string key=\"concept:name\" value=\"a\"/>\n</event>\n</trace>\n</log>",
                 "line 5: <event>: event without time:timestamp");
    expect_error("<log>\n<trace>\n<string key=\"concept:name\" value=\"1\"/>\n<event>\n<int key=\"n\" value=\"x\"/>",
                 "line 5: <int>: attribute 'n' has non-integer value 'x'");
    expect_error("<log>\n<trace>\n<event>\n<date key=\"time:timestamp\" value=\"yesterday\"/>",
                 "line 4: <date>: attribute 'time:timestamp' has unreadable date");
    expect_error("<log><trace><bogus/></trace></log>", "<bogus>: unknown element");
    expect_error("<log><event/></log>", "<event>: event outside <trace>");
    expect_error("<log><trace></trace></log>", "trace without concept:name");
    expect_error("<log><trace>", "malformed XML");
}

TEST_CASE("round trip over randomized logs") {
    std::mt19937_64 rng(77);
    testsupport::LogShape shape;
    shape.extra_attributes = true;
    for (int i = 0; i < 100; ++i) {
        auto log = testsupport::random_log(rng, shape);
        CAPTURE(i);
        std::string first = to_xes(log);
        EventLog back = parse_xes(first);
        CHECK(back == log);
        CHECK(to_xes(back) == first);
    }
}

TEST_CASE("round trip of a converted simulation") {
    sim::SimConfig c;
    c.seed = 3;
    c.max_steps = 10;
    auto log = convert(sim::run(c).records, c.base_date);
    log.meta.source_digest = "abc";
    auto path = std::filesystem::temp_directory_path() / "abspm_roundtrip.xes";
    write_xes(log, path);
    auto back = read_xes(path);
    CHECK(back == log);
    CHECK_THROWS_AS(read_xes(path.string() + ".missing"), IoError);
}
