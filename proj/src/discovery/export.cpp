#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "abspm/dfg.hpp"
#include "abspm/error.hpp"

namespace abspm::discovery {

namespace {

using ojson = nlohmann::ordered_json;

// light to dark; the two darkest buckets take white text
constexpr std::array<std::string_view, 5> kFill = {"#eff3ff", "#bdd7e7", "#6baed6", "#3182bd", "#08519c"};
constexpr std::string_view kNeutralFill = "#f7f7f7";
constexpr std::string_view kStartColor = "#2ca25f";
constexpr std::string_view kEndColor = "#de2d26";

std::string dot_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string dot_quote(std::string_view text) {
    return "\"" + dot_escape(text) + "\"";
}

std::size_t bucket(double value, double lo, double hi) {
    if (hi <= lo) return kFill.size() - 1;
    auto b = static_cast<std::size_t>(std::floor((value - lo) / (hi - lo) * static_cast<double>(kFill.size())));
    return std::min(b, kFill.size() - 1);
}

std::string value_pair(std::optional<double> primary, Indicator p, std::optional<double> secondary, Indicator s) {
    if (!primary && !secondary) return {};
    if (!primary) return "(" + format_indicator_value(s, *secondary) + ")";
    if (!secondary) return format_indicator_value(p, *primary);
    return format_indicator_value(p, *primary) + " (" + format_indicator_value(s, *secondary) + ")";
}

}  // namespace

std::string export_dot(const Dfg& dfg, Indicator primary, Indicator secondary) {
    std::string out;
    out += "digraph process_model {\n";
    out += "  rankdir=TB;\n";
    out += "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n";
    out += "  edge [fontname=\"Helvetica\", fontsize=10];\n";

    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& [a, m] : dfg.nodes) {
        if (auto v = node_value(dfg, m, primary)) {
            lo = any ? std::min(lo, *v) : *v;
            hi = any ? std::max(hi, *v) : *v;
            any = true;
        }
    }

    for (const auto& [activity, m] : dfg.nodes) {
        auto pv = node_value(dfg, m, primary);
        auto sv = node_value(dfg, m, secondary);
        std::string label = dot_escape(activity);
        if (auto values = value_pair(pv, primary, sv, secondary); !values.empty()) label += "\\n" + dot_escape(values);

        std::string fill(kNeutralFill);
        std::string font = "black";
        if (pv) {
            auto b = bucket(*pv, lo, hi);
            fill = std::string(kFill[b]);
            if (b >= 3) font = "white";
        }
        std::string attrs = fmt::format("label=\"{}\", fillcolor=\"{}\", fontcolor=\"{}\"", label, fill, font);

        const bool is_start = dfg.start_activities.contains(activity);
        const bool is_end = dfg.end_activities.contains(activity);
        if (is_start && is_end) {
            attrs += fmt::format(", color=\"{}:{}\", penwidth=2, xlabel=\"start {} / end {}\"", kStartColor, kEndColor,
                                 dfg.start_activities.at(activity), dfg.end_activities.at(activity));
        } else if (is_start) {
            attrs += fmt::format(", color=\"{}\", penwidth=2, xlabel=\"start {}\"", kStartColor,
                                 dfg.start_activities.at(activity));
        } else if (is_end) {
            attrs += fmt::format(", color=\"{}\", penwidth=2, xlabel=\"end {}\"", kEndColor,
                                 dfg.end_activities.at(activity));
        }
        out += fmt::format("  {} [{}];\n", dot_quote(activity), attrs);
    }

    double max_edge = 0.0;
    for (const auto& [k, m] : dfg.edges) max_edge = std::max(max_edge, edge_value(dfg, m, primary));
    for (const auto& [key, m] : dfg.edges) {
        double pv = edge_value(dfg, m, primary);
        double sv = edge_value(dfg, m, secondary);
        double width = max_edge > 0.0 ? 1.0 + 4.0 * pv / max_edge : 1.0;
        out += fmt::format("  {} -> {} [label={}, penwidth={:.2f}];\n", dot_quote(key.first), dot_quote(key.second),
                           dot_quote(value_pair(pv, primary, sv, secondary)), width);
    }
    out += "}\n";
    return out;
}

std::string export_dot(const Dfg& dfg, std::string_view primary, std::string_view secondary) {
    return export_dot(dfg, parse_indicator(primary), parse_indicator(secondary));
}

std::string export_json(const Dfg& dfg) {
    ojson doc;
    doc["total_cases"] = dfg.total_cases;
    ojson nodes = ojson::array();
    for (const auto& [activity, m] : dfg.nodes) {
        ojson n;
        n["activity"] = activity;
        n["absolute_frequency"] = m.absolute_frequency;
        n["case_frequency"] = m.case_frequency;
        n["max_repetitions"] = m.max_repetitions;
        n["case_coverage"] = m.case_coverage;
        n["start_count"] = dfg.start_activities.contains(activity) ? dfg.start_activities.at(activity) : 0;
        n["end_count"] = dfg.end_activities.contains(activity) ? dfg.end_activities.at(activity) : 0;
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    ojson edges = ojson::array();
    for (const auto& [key, m] : dfg.edges) {
        ojson e;
        e["source"] = key.first;
        e["target"] = key.second;
        e["absolute_frequency"] = m.absolute_frequency;
        e["case_frequency"] = m.case_frequency;
        e["max_repetitions"] = m.max_repetitions;
        ojson d;
        d["min"] = m.duration.min;
        d["max"] = m.duration.max;
        d["mean"] = m.duration.mean;
        d["median"] = m.duration.median;
        d["total"] = m.duration.total;
        e["duration_days"] = std::move(d);
        edges.push_back(std::move(e));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

Dfg dfg_from_json(std::string_view text) {
    Dfg dfg;
    try {
        auto doc = ojson::parse(text);
        dfg.total_cases = doc.at("total_cases").get<std::size_t>();
        for (const auto& n : doc.at("nodes")) {
            auto activity = n.at("activity").get<std::string>();
            NodeMetrics m;
            m.absolute_frequency = n.at("absolute_frequency").get<std::size_t>();
            m.case_frequency = n.at("case_frequency").get<std::size_t>();
            m.max_repetitions = n.at("max_repetitions").get<std::size_t>();
            m.case_coverage = n.at("case_coverage").get<double>();
            if (auto s = n.at("start_count").get<std::size_t>(); s > 0) dfg.start_activities[activity] = s;
            if (auto s = n.at("end_count").get<std::size_t>(); s > 0) dfg.end_activities[activity] = s;
            dfg.nodes[activity] = m;
        }
        for (const auto& e : doc.at("edges")) {
            EdgeMetrics m;
            m.absolute_frequency = e.at("absolute_frequency").get<std::size_t>();
            m.case_frequency = e.at("case_frequency").get<std::size_t>();
            m.max_repetitions = e.at("max_repetitions").get<std::size_t>();
            const auto& d = e.at("duration_days");
            m.duration = {d.at("min").get<double>(), d.at("max").get<double>(), d.at("mean").get<double>(),
                          d.at("median").get<double>(), d.at("total").get<double>()};
            EdgeKey key{e.at("source").get<std::string>(), e.at("target").get<std::string>()};
            if (!dfg.nodes.contains(key.first) || !dfg.nodes.contains(key.second)) {
                throw ParseError(fmt::format("model json: edge {} -> {} references an unknown node", key.first,
                                             key.second));
            }
            dfg.edges[key] = m;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("model json: {}", e.what()));
    }
    return dfg;
}

}  // namespace abspm::discovery
