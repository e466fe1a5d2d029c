#include "abspm/dfg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "abspm/error.hpp"

namespace abspm::discovery {

namespace {

DurationStats summarize_durations(std::vector<double>& values) {
    DurationStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    for (double v : values) s.total += v;
    s.mean = s.total / static_cast<double>(values.size());
    std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    return s;
}

}  // namespace

Dfg build_dfg(const eventlog::EventLog& log) {
    if (log.event_count() == 0) throw InvalidArgument("cannot discover a model from an empty log");

    Dfg dfg;
    std::map<EdgeKey, std::vector<double>> durations;
    for (const auto& trace : log.traces) {
        if (trace.events.empty()) continue;
        ++dfg.total_cases;
        std::map<Activity, std::size_t> node_counts;
        std::map<EdgeKey, std::size_t> edge_counts;
        for (std::size_t i = 0; i < trace.events.size(); ++i) {
            const auto& e = trace.events[i];
            ++node_counts[e.activity];
            if (i + 1 < trace.events.size()) {
                const auto& next = trace.events[i + 1];
                EdgeKey key{e.activity, next.activity};
                ++edge_counts[key];
                durations[key].push_back(days_between(e.timestamp, next.timestamp));
            }
        }
        ++dfg.start_activities[trace.events.front().activity];
        ++dfg.end_activities[trace.events.back().activity];
        for (const auto& [activity, n] : node_counts) {
            NodeMetrics& m = dfg.nodes[activity];
            m.absolute_frequency += n;
            m.case_frequency += 1;
            m.max_repetitions = std::max(m.max_repetitions, n);
        }
        for (const auto& [key, n] : edge_counts) {
            EdgeMetrics& m = dfg.edges[key];
            m.absolute_frequency += n;
            m.case_frequency += 1;
            m.max_repetitions = std::max(m.max_repetitions, n);
        }
    }
    for (auto& [activity, m] : dfg.nodes) {
        m.case_coverage = static_cast<double>(m.case_frequency) / static_cast<double>(dfg.total_cases);
    }
    for (auto& [key, m] : dfg.edges) m.duration = summarize_durations(durations[key]);
    return dfg;
}

// --- indicators --------------------------------------------------------------

namespace {

constexpr std::pair<Indicator, std::string_view> kIndicatorNames[] = {
    {Indicator::absolute_frequency, "absolute_frequency"},
    {Indicator::case_frequency, "case_frequency"},
    {Indicator::max_repetitions, "max_repetitions"},
    {Indicator::case_coverage, "case_coverage"},
    {Indicator::min_duration, "min_duration"},
    {Indicator::max_duration, "max_duration"},
    {Indicator::mean_duration, "mean_duration"},
    {Indicator::median_duration, "median_duration"},
    {Indicator::total_duration, "total_duration"},
};

}  // namespace

std::string_view indicator_name(Indicator indicator) {
    for (const auto& [value, name] : kIndicatorNames) {
        if (value == indicator) return name;
    }
    return "unknown";
}

std::vector<std::string_view> indicator_names() {
    std::vector<std::string_view> names;
    for (const auto& entry : kIndicatorNames) names.push_back(entry.second);
    return names;
}

Indicator parse_indicator(std::string_view name) {
    for (const auto& [value, known] : kIndicatorNames) {
        if (known == name) return value;
    }
    throw InvalidArgument(
        fmt::format("unknown indicator '{}'; valid names: {}", name, fmt::join(indicator_names(), ", ")));
}

bool is_duration(Indicator indicator) {
    switch (indicator) {
        case Indicator::min_duration:
        case Indicator::max_duration:
        case Indicator::mean_duration:
        case Indicator::median_duration:
        case Indicator::total_duration:
            return true;
        default:
            return false;
    }
}

std::optional<double> node_value(const Dfg&, const NodeMetrics& node, Indicator indicator) {
    switch (indicator) {
        case Indicator::absolute_frequency: return static_cast<double>(node.absolute_frequency);
        case Indicator::case_frequency: return static_cast<double>(node.case_frequency);
        case Indicator::max_repetitions: return static_cast<double>(node.max_repetitions);
        case Indicator::case_coverage: return node.case_coverage;
        default: return std::nullopt;
    }
}

double edge_value(const Dfg& dfg, const EdgeMetrics& edge, Indicator indicator) {
    switch (indicator) {
        case Indicator::absolute_frequency: return static_cast<double>(edge.absolute_frequency);
        case Indicator::case_frequency: return static_cast<double>(edge.case_frequency);
        case Indicator::max_repetitions: return static_cast<double>(edge.max_repetitions);
        case Indicator::case_coverage:
            return dfg.total_cases == 0 ? 0.0
                                        : static_cast<double>(edge.case_frequency) / static_cast<double>(dfg.total_cases);
        case Indicator::min_duration: return edge.duration.min;
        case Indicator::max_duration: return edge.duration.max;
        case Indicator::mean_duration: return edge.duration.mean;
        case Indicator::median_duration: return edge.duration.median;
        case Indicator::total_duration: return edge.duration.total;
    }
    return 0.0;
}

std::string format_indicator_value(Indicator indicator, double value) {
    if (indicator == Indicator::case_coverage) return fmt::format("{}%", std::lround(value * 100.0));
    if (is_duration(indicator)) {
        if (value == std::floor(value)) return fmt::format("{} d", static_cast<long long>(value));
        return fmt::format("{:.2f} d", value);
    }
    return fmt::format("{}", static_cast<long long>(std::llround(value)));
}

}  // namespace abspm::discovery
