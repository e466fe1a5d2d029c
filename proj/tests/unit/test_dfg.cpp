#include "doctest.h"

#include <random>
#include <set>

#include "abspm/dfg.hpp"
#include "abspm/error.hpp"
#include "oracles/dfg_oracle.hpp"
#include "support/random_logs.hpp"

using namespace abspm;
using namespace abspm::discovery;
using abspm::eventlog::Event;
using abspm::eventlog::EventLog;
using abspm::eventlog::Trace;

namespace {

const Date kBase{std::chrono::year{2023}, std::chrono::October, std::chrono::day{17}};

EventLog make_log(const std::vector<std::pair<std::string, std::vector<std::pair<std::string, int>>>>& cases) {
    EventLog log;
    for (const auto& [id, events] : cases) {
        Trace t;
        t.case_id = id;
        for (const auto& [activity, day] : events) t.events.push_back({activity, at_midnight(add_days(kBase, day)), {}});
        log.traces.push_back(std::move(t));
    }
    return log;
}

void check_against_brute_force(const EventLog& log, const Dfg& dfg) {
    auto letters = oracle::alphabet(log);
    CHECK(dfg.nodes.size() == letters.size());
    std::size_t nonempty = 0;
    for (const auto& t : log.traces) nonempty += t.events.empty() ? 0 : 1;
    CHECK(dfg.total_cases == nonempty);
    for (const auto& a : letters) {
        auto n = oracle::brute_node(log, a);
        REQUIRE(dfg.nodes.contains(a));
        const auto& m = dfg.nodes.at(a);
        CHECK(m.absolute_frequency == n.abs);
        CHECK(m.case_frequency == n.cases);
        CHECK(m.max_repetitions == n.maxrep);
        CHECK(m.case_coverage == doctest::Approx(static_cast<double>(n.cases) / static_cast<double>(nonempty)));
        CHECK((dfg.start_activities.contains(a) ? dfg.start_activities.at(a) : 0) == n.starts);
        CHECK((dfg.end_activities.contains(a) ? dfg.end_activities.at(a) : 0) == n.ends);
        for (const auto& b : letters) {
            auto e = oracle::brute_edge(log, a, b);
            EdgeKey key{a, b};
            if (e.abs == 0) {
                CHECK_FALSE(dfg.edges.contains(key));
                continue;
            }
            REQUIRE(dfg.edges.contains(key));
            const auto& m2 = dfg.edges.at(key);
            CHECK(m2.absolute_frequency == e.abs);
            CHECK(m2.case_frequency == e.cases);
            CHECK(m2.max_repetitions == e.maxrep);
            double total = 0;
            for (double d : e.durations) total += d;
            CHECK(m2.duration.min == e.durations.front());
            CHECK(m2.duration.max == e.durations.back());
            CHECK(m2.duration.total == doctest::Approx(total));
            CHECK(m2.duration.mean == doctest::Approx(total / static_cast<double>(e.durations.size())));
            CHECK(m2.duration.median == oracle::median_of(e.durations));
        }
    }
}

bool edges_subset(const Dfg& small, const Dfg& big) {
    for (const auto& [k, m] : small.edges) {
        if (!big.edges.contains(k)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("hand-counted two-case log") {
    auto log = make_log({{"A", {{"m", 0}, {"h", 0}}}, {"B", {{"m", 0}, {"m", 1}, {"h", 3}}}});
    auto dfg = build_dfg(log);
    CHECK(dfg.total_cases == 2);
    const auto& m = dfg.nodes.at("m");
    CHECK(m.absolute_frequency == 3);
    CHECK(m.case_frequency == 2);
    CHECK(m.max_repetitions == 2);
    CHECK(m.case_coverage == 1.0);
    const auto& mm = dfg.edges.at({"m", "m"});
    CHECK(mm.absolute_frequency == 1);
    CHECK(mm.case_frequency == 1);
    const auto& mh = dfg.edges.at({"m", "h"});
    CHECK(mh.absolute_frequency == 2);
    CHECK(mh.case_frequency == 2);
    CHECK(mh.duration.min == 0.0);
    CHECK(mh.duration.max == 2.0);
    CHECK(mh.duration.mean == 1.0);
    CHECK(mh.duration.median == 1.0);
    CHECK(dfg.start_activities.at("m") == 2);
    CHECK(dfg.end_activities.at("h") == 2);
    CHECK(dfg.edges.size() == 2);
}

TEST_CASE("single one-event case") {
    auto dfg = build_dfg(make_log({{"1", {{"move_location", 0}}}}));
    CHECK(dfg.nodes.size() == 1);
    CHECK(dfg.edges.empty());
    CHECK(dfg.start_activities.at("move_location") == 1);
    CHECK(dfg.end_activities.at("move_location") == 1);
}

TEST_CASE("empty log is rejected") {
    CHECK_THROWS_AS(build_dfg(EventLog{}), InvalidArgument);
}

TEST_CASE("metrics equal the brute-force counter on random logs") {
    std::mt19937_64 rng(500);
    for (int i = 0; i < 500; ++i) {
        auto log = testsupport::random_log(rng);
        if (log.event_count() == 0) continue;
        CAPTURE(i);
        auto dfg = build_dfg(log);
        check_against_brute_force(log, dfg);

        std::size_t node_total = 0, edge_total = 0, expected_edges = 0;
        for (const auto& [a, m] : dfg.nodes) node_total += m.absolute_frequency;
        for (const auto& [k, m] : dfg.edges) edge_total += m.absolute_frequency;
        for (const auto& t : log.traces) expected_edges += t.events.size() - 1;
        CHECK(node_total == log.event_count());
        CHECK(edge_total == expected_edges);
    }
}

TEST_CASE("indicator names") {
    CHECK(parse_indicator("case_frequency") == Indicator::case_frequency);
    CHECK(indicator_name(Indicator::max_repetitions) == "max_repetitions");
    try {
        parse_indicator("popularity");
        FAIL("expected rejection");
    } catch (const InvalidArgument& e) {
        std::string msg = e.what();
        CHECK(msg.find("popularity") != std::string::npos);
        for (auto name : indicator_names()) CHECK(msg.find(std::string(name)) != std::string::npos);
    }
    CHECK(format_indicator_value(Indicator::case_coverage, 5.0 / 12.0) == "42%");
    CHECK(format_indicator_value(Indicator::case_frequency, 12) == "12");
    CHECK(format_indicator_value(Indicator::max_duration, 3) == "3 d");
    CHECK(format_indicator_value(Indicator::mean_duration, 2.5) == "2.50 d");
}

TEST_CASE("abstraction identity") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        auto log = testsupport::random_log(rng);
        if (log.event_count() == 0) continue;
        auto full = build_dfg(log);
        CHECK(abstract(full, log, AbstractionSpec{}) == full);
    }
}

TEST_CASE("abstraction spec validation") {
    AbstractionSpec s;
    s.activity_ratio = 0.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    s.path_ratio = 1.5;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    s.cutoff = -0.1;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    CHECK(parse_mode("fuzzy") == AbstractionMode::fuzzy);
    CHECK_THROWS_AS(parse_mode("cluster"), InvalidArgument);
    CHECK(retained_count(0.15, 20) == 3);
    CHECK(retained_count(2.0 / 3.0, 3) == 2);
    CHECK(retained_count(0.0, 7) == 0);
}

TEST_CASE("activity projection on a three-activity log") {
    // frequencies: a=4, b=3, c=2
    auto log = make_log({{"1", {{"a", 0}, {"c", 1}, {"b", 2}, {"a", 3}}},
                         {"2", {{"b", 0}, {"a", 1}, {"c", 4}}},
                         {"3", {{"a", 0}, {"b", 5}}}});
    auto full = build_dfg(log);
    AbstractionSpec spec;
    spec.activity_ratio = 2.0 / 3.0;
    auto reduced = abstract(full, log, spec);
    CHECK(reduced.nodes.size() == 2);
    CHECK_FALSE(reduced.nodes.contains("c"));

    // projected traces by hand: [a b a], [b a], [a b]
    auto projected = make_log({{"1", {{"a", 0}, {"b", 2}, {"a", 3}}}, {"2", {{"b", 0}, {"a", 1}}}, {"3", {{"a", 0}, {"b", 5}}}});
    check_against_brute_force(projected, reduced);
    CHECK(reduced.edges.at({"a", "b"}).absolute_frequency == 2);
    CHECK(reduced.edges.at({"b", "a"}).absolute_frequency == 2);
    CHECK(reduced.edges.at({"a", "b"}).duration.max == 5.0);
}

TEST_CASE("path skeleton and monotone edge sets") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        auto log = testsupport::random_log(rng);
        if (log.event_count() == 0) continue;
        auto full = build_dfg(log);
        AbstractionSpec spec;
        spec.activity_ratio = std::max(0.05, unit(rng));
        spec.path_ratio = unit(rng);
        CAPTURE(i);
        auto model = abstract(full, log, spec);
        for (const auto& [node, m] : model.nodes) {
            bool out = false, in = false;
            for (const auto& [k, e] : model.edges) {
                out = out || k.first == node;
                in = in || k.second == node;
            }
            if (!model.end_activities.contains(node)) CHECK(out);
            if (!model.start_activities.contains(node)) CHECK(in);
        }
        AbstractionSpec lower = spec;
        lower.path_ratio = spec.path_ratio * unit(rng);
        auto smaller = abstract(full, log, lower);
        CHECK(edges_subset(smaller, model));
        CHECK(smaller.nodes == model.nodes);

        AbstractionSpec all_paths = spec;
        all_paths.path_ratio = 1.0;
        CHECK(edges_subset(model, abstract(full, log, all_paths)));
    }
}

TEST_CASE("minimum path ratio keeps each node connected") {
    auto log = make_log({{"1", {{"a", 0}, {"b", 1}, {"c", 2}, {"a", 3}}}, {"2", {{"a", 0}, {"c", 1}}}});
    auto full = build_dfg(log);
    AbstractionSpec spec;
    spec.path_ratio = 0.0;
    auto model = abstract(full, log, spec);
    auto skeleton = skeleton_edges(full);
    CHECK(model.edges.size() == skeleton.size());
    for (const auto& k : skeleton) CHECK(model.edges.contains(k));
}

TEST_CASE("fuzzy metrics") {
    // a->b twice with durations 1 and 3; b->c once with duration 0
    auto log = make_log({{"1", {{"a", 0}, {"b", 1}, {"c", 1}}}, {"2", {{"a", 0}, {"b", 3}}}});
    auto dfg = build_dfg(log);
    auto fm = fuzzy_metrics(dfg, 0.5);
    CHECK(fm.node_significance.at("a") == 1.0);
    CHECK(fm.node_significance.at("b") == 1.0);
    CHECK(fm.node_significance.at("c") == 0.5);
    const auto& ab = fm.edges.at({"a", "b"});
    CHECK(ab.significance == 1.0);
    CHECK(ab.correlation == doctest::Approx(1.0 / 3.0));  // mean 2 days
    CHECK(ab.utility == doctest::Approx(0.5 + 0.5 / 3.0));
    const auto& bc = fm.edges.at({"b", "c"});
    CHECK(bc.significance == 0.5);
    CHECK(bc.correlation == 1.0);
    CHECK(bc.utility == doctest::Approx(0.75));
}

TEST_CASE("fuzzy values stay in range and rank like frequency at weight 1") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        auto log = testsupport::random_log(rng);
        if (log.event_count() == 0) continue;
        auto dfg = build_dfg(log);
        double w = unit(rng);
        auto fm = fuzzy_metrics(dfg, w);
        for (const auto& [a, s] : fm.node_significance) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        for (const auto& [k, f] : fm.edges) {
            for (double v : {f.significance, f.correlation, f.utility}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            if (f.significance > f.correlation) {
                CHECK(fuzzy_metrics(dfg, std::min(1.0, w + 0.1)).edges.at(k).utility >= f.utility);
            }
        }
        auto top = fuzzy_metrics(dfg, 1.0);
        for (const auto& [k1, f1] : top.edges) {
            for (const auto& [k2, f2] : top.edges) {
                bool by_freq = dfg.edges.at(k1).absolute_frequency > dfg.edges.at(k2).absolute_frequency;
                CHECK(by_freq == (f1.utility > f2.utility));
            }
        }
    }
}

TEST_CASE("fuzzy filter boundaries and stranded nodes") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        auto log = testsupport::random_log(rng);
        if (log.event_count() == 0) continue;
        auto dfg = build_dfg(log);
        auto fm = fuzzy_metrics(dfg, unit(rng));
        CHECK(fuzzy_filter(dfg, fm, 0.0) == dfg);

        auto filtered = fuzzy_filter(dfg, fm, unit(rng));
        CHECK(edges_subset(filtered, dfg));
        for (const auto& [node, m] : dfg.nodes) {
            auto count = [&](const Dfg& g, bool outgoing) {
                std::size_t n = 0;
                for (const auto& [k, e] : g.edges) n += (outgoing ? k.first : k.second) == node ? 1 : 0;
                return n;
            };
            if (count(dfg, true) > 0) CHECK(count(filtered, true) > 0);
            if (count(dfg, false) > 0) CHECK(count(filtered, false) > 0);
        }

        // cutoff 1 keeps the per-node best edges plus perfect-utility edges only
        auto skeleton = fuzzy_filter(dfg, fm, 1.0);
        for (const auto& [k, e] : skeleton.edges) {
            if (fm.edges.at(k).utility >= 1.0) continue;
            bool best_out = true, best_in = true;
            for (const auto& [k2, e2] : dfg.edges) {
                if (k2.first == k.first && fm.edges.at(k2).utility > fm.edges.at(k).utility) best_out = false;
                if (k2.second == k.second && fm.edges.at(k2).utility > fm.edges.at(k).utility) best_in = false;
            }
            CHECK((best_out || best_in));
        }
    }
}

TEST_CASE("fuzzy abstraction mode") {
    auto log = make_log({{"1", {{"a", 0}, {"b", 0}}}, {"2", {{"a", 0}, {"c", 30}}}, {"3", {{"b", 0}, {"c", 0}}}});
    auto dfg = build_dfg(log);
    AbstractionSpec spec;
    spec.mode = AbstractionMode::fuzzy;
    spec.utility_weight = 0.0;
    spec.cutoff = 0.5;
    auto model = abstract(dfg, log, spec);
    // a->c spans 30 days (correlation 1/31); a and c stay connected through
    // a->b and b->c, so nothing restores it
    CHECK_FALSE(model.edges.contains({"a", "c"}));
    CHECK(model.edges.contains({"a", "b"}));
    CHECK(model.edges.contains({"b", "c"}));

    // a node's only incoming edge survives any cutoff
    auto chain = make_log({{"1", {{"x", 0}, {"y", 50}}}});
    auto kept = abstract(build_dfg(chain), chain, spec);
    CHECK(kept.edges.contains({"x", "y"}));
}

TEST_CASE("dot export") {
    auto log = make_log({{"1", {{"move_location", 0}, {"move_location", 1}, {"change_happy_3_2", 2}}},
                         {"2", {{"move_location", 0}, {"change_happy_3_2", 1}}}});
    auto dfg = build_dfg(log);
    dfg.nodes.at("move_location").case_frequency = 12;
    dfg.nodes.at("move_location").max_repetitions = 22;
    auto dot = export_dot(dfg, Indicator::case_frequency, Indicator::max_repetitions);
    CHECK(dot.find("label=\"move_location\\n12 (22)\"") != std::string::npos);
    CHECK(dot.find("\"move_location\" -> \"change_happy_3_2\" [label=\"2 (1)\", penwidth=5.00];") != std::string::npos);
    CHECK(dot.find("\"move_location\" -> \"move_location\" [label=\"1 (1)\", penwidth=3.00];") != std::string::npos);
    CHECK(dot.find("xlabel=\"start 2\"") != std::string::npos);
    CHECK(dot.find("xlabel=\"end 2\"") != std::string::npos);
    CHECK(dot == export_dot(dfg, "case_frequency", "max_repetitions"));
    CHECK_THROWS_AS(export_dot(dfg, "cf", "max_repetitions"), InvalidArgument);

    // duration primary: nodes carry only the secondary value, edges both
    auto by_duration = export_dot(dfg, Indicator::max_duration, Indicator::case_coverage);
    CHECK(by_duration.find("label=\"change_happy_3_2\\n(100%)\"") != std::string::npos);
    CHECK(by_duration.find("[label=\"1 d (100%)\"") != std::string::npos);

    auto single = build_dfg(make_log({{"1", {{"a", 0}}}}));
    auto nodes_only = export_dot(single, Indicator::case_frequency, Indicator::max_repetitions);
    CHECK(nodes_only.find("->") == std::string::npos);
    CHECK(nodes_only.find("\"a\" [label=\"a\\n1 (1)\"") != std::string::npos);
}

TEST_CASE("dot fill follows a five-step scale") {
    EventLog log;
    for (int c = 0; c < 5; ++c) {
        Trace t;
        t.case_id = std::to_string(c);
        for (int k = 0; k <= c; ++k) t.events.push_back({"a" + std::to_string(k), at_midnight(kBase), {}});
        log.traces.push_back(t);
    }
    // case frequencies: a0=5, a1=4, a2=3, a3=2, a4=1
    auto dot = export_dot(build_dfg(log), Indicator::case_frequency, Indicator::max_repetitions);
    CHECK(dot.find("\"a0\" [label=\"a0\\n5 (1)\", fillcolor=\"#08519c\", fontcolor=\"white\"") != std::string::npos);
    CHECK(dot.find("\"a4\" [label=\"a4\\n1 (1)\", fillcolor=\"#eff3ff\", fontcolor=\"black\"") != std::string::npos);
    CHECK(dot.find("\"a2\" [label=\"a2\\n3 (1)\", fillcolor=\"#6baed6\"") != std::string::npos);
}

TEST_CASE("json export") {
    auto log = make_log({{"A", {{"m", 0}, {"h", 0}}}, {"B", {{"m", 0}, {"m", 1}, {"h", 3}}}});
    auto dfg = build_dfg(log);
    std::string expected = R"({
  "total_cases": 2,
  "nodes": [
    {
      "activity": "h",
      "absolute_frequency": 2,
      "case_frequency": 2,
      "max_repetitions": 1,
      "case_coverage": 1.0,
      "start_count": 0,
      "end_count": 2
    },
    {
      "activity": "m",
      "absolute_frequency": 3,
      "case_frequency": 2,
      "max_repetitions": 2,
      "case_coverage": 1.0,
      "start_count": 2,
      "end_count": 0
    }
  ],
  "edges": [
    {
      "source": "m",
      "target": "h",
      "absolute_frequency": 2,
      "case_frequency": 2,
      "max_repetitions": 1,
      "duration_days": {
        "min": 0.0,
        "max": 2.0,
        "mean": 1.0,
        "median": 1.0,
        "total": 2.0
      }
    },
    {
      "source": "m",
      "target": "m",
      "absolute_frequency": 1,
      "case_frequency": 1,
      "max_repetitions": 1,
      "duration_days": {
        "min": 1.0,
        "max": 1.0,
        "mean": 1.0,
        "median": 1.0,
        "total": 1.0
      }
    }
  ]
}
)";
    CHECK(export_json(dfg) == expected);
    CHECK(expected.find("null") == std::string::npos);
    CHECK(dfg_from_json(expected) == dfg);

    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
        auto random = testsupport::random_log(rng);
        if (random.event_count() == 0) continue;
        auto g = build_dfg(random);
        auto text = export_json(g);
        CHECK(dfg_from_json(text) == g);
        CHECK(export_json(dfg_from_json(text)) == text);
    }
    CHECK_THROWS_AS(dfg_from_json("{\"nodes\": []}"), ParseError);
    CHECK_THROWS_AS(dfg_from_json("not json"), ParseError);
}
