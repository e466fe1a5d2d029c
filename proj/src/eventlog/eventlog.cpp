#include "abspm/eventlog.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include <fmt/format.h>

#include "abspm/error.hpp"

namespace abspm::eventlog {

const Attribute* find_attribute(std::span<const Attribute> attributes, std::string_view key) {
    for (const auto& a : attributes) {
        if (a.key == key) return &a;
    }
    return nullptr;
}

std::optional<std::int64_t> int_attribute(std::span<const Attribute> attributes, std::string_view key) {
    const Attribute* a = find_attribute(attributes, key);
    if (a == nullptr || a->type != "int") return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(a->value.data(), a->value.data() + a->value.size(), v);
    if (ec != std::errc{} || ptr != a->value.data() + a->value.size()) return std::nullopt;
    return v;
}

std::size_t EventLog::event_count() const {
    std::size_t n = 0;
    for (const auto& t : traces) n += t.events.size();
    return n;
}

// --- labels ------------------------------------------------------------------

namespace {

std::optional<int> single_digit(std::string_view s) {
    if (s.size() != 1 || s[0] < '0' || s[0] > '9') return std::nullopt;
    return s[0] - '0';
}

}  // namespace

std::optional<ActivityLabel> parse_activity(std::string_view label) {
    if (label == kMoveActivity) return ActivityLabel{LabelKind::move, 0, 0};
    ActivityLabel out;
    std::string_view rest;
    if (label.starts_with("change_happy_")) {
        out.kind = LabelKind::change_happy;
        rest = label.substr(13);
    } else if (label.starts_with("change_unhappy_")) {
        out.kind = LabelKind::change_unhappy;
        rest = label.substr(15);
    } else {
        return std::nullopt;
    }
    auto sep = rest.find('_');
    if (sep == std::string_view::npos) return std::nullopt;
    auto x = single_digit(rest.substr(0, sep));
    auto y = single_digit(rest.substr(sep + 1));
    if (!x || !y || *y > *x || *x > 8) return std::nullopt;
    out.neighbors = *x;
    out.similar = *y;
    return out;
}

std::string format_activity(const ActivityLabel& label) {
    switch (label.kind) {
        case LabelKind::move:
            return std::string(kMoveActivity);
        case LabelKind::change_happy:
            return fmt::format("change_happy_{}_{}", label.neighbors, label.similar);
        case LabelKind::change_unhappy:
            return fmt::format("change_unhappy_{}_{}", label.neighbors, label.similar);
    }
    return {};
}

// --- conversion --------------------------------------------------------------

ConversionError::ConversionError(std::uint64_t event_no, const std::string& message)
    : Error(fmt::format("record {}: {}", event_no, message)), event_no_(event_no) {}

bool event_before(const Event& a, const Event& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return int_attribute(a.attributes, kStepCounterKey).value_or(0) <
           int_attribute(b.attributes, kStepCounterKey).value_or(0);
}

EventLog convert(std::span<const sim::RawEventRecord> records, Date base_date) {
    std::map<sim::AgentId, Trace> cases;
    for (const auto& r : records) {
        const int x = static_cast<int>(r.neighbor_ids.size());
        const int y = r.similar_count;
        if (r.step < 0) throw ConversionError(r.event_no, fmt::format("negative step {}", r.step));
        if (x > 8) throw ConversionError(r.event_no, fmt::format("{} neighbors exceed the Moore neighborhood", x));
        if (y < 0 || y > x) {
            throw ConversionError(r.event_no, fmt::format("similar count {} outside [0, {}]", y, x));
        }

        Event e;
        if (r.kind == sim::RecordKind::move) {
            e.activity = std::string(kMoveActivity);
        } else {
            e.activity = format_activity({r.happy ? LabelKind::change_happy : LabelKind::change_unhappy, x, y});
        }
        e.timestamp = at_midnight(add_days(base_date, r.step));
        e.attributes.push_back({std::string(kStepKey), "int", std::to_string(r.step), {}});
        e.attributes.push_back({std::string(kStepCounterKey), "int", std::to_string(r.step_counter), {}});

        Trace& t = cases[r.agent_id];
        if (t.case_id.empty()) t.case_id = std::to_string(r.agent_id);
        t.events.push_back(std::move(e));
    }

    EventLog log;
    log.meta.name = "schelling";
    log.meta.base_date = base_date;
    log.traces.reserve(cases.size());
    for (auto& [id, trace] : cases) {
        std::stable_sort(trace.events.begin(), trace.events.end(), event_before);
        log.traces.push_back(std::move(trace));
    }
    return log;
}

// --- statistics --------------------------------------------------------------

LogStats stats(const EventLog& log) {
    LogStats s;
    s.cases = log.traces.size();
    std::vector<std::size_t> sizes;
    sizes.reserve(log.traces.size());
    for (const auto& t : log.traces) {
        sizes.push_back(t.events.size());
        s.events += t.events.size();
        std::set<std::pair<Timestamp::rep, std::int64_t>> seen;
        bool duplicate = false;
        for (const auto& e : t.events) {
            ++s.activity_frequency[e.activity];
            if (!parse_activity(e.activity)) ++s.label_violations;
            if (!s.first_timestamp || e.timestamp < *s.first_timestamp) s.first_timestamp = e.timestamp;
            if (!s.last_timestamp || e.timestamp > *s.last_timestamp) s.last_timestamp = e.timestamp;
            auto key = std::make_pair(e.timestamp.time_since_epoch().count(),
                                      int_attribute(e.attributes, kStepCounterKey).value_or(0));
            if (!seen.insert(key).second) duplicate = true;
        }
        if (duplicate) ++s.duplicate_timestamp_cases;
    }
    s.activities = s.activity_frequency.size();
    if (!sizes.empty()) {
        std::sort(sizes.begin(), sizes.end());
        s.min_events_per_case = sizes.front();
        s.max_events_per_case = sizes.back();
        std::size_t mid = sizes.size() / 2;
        s.median_events_per_case = sizes.size() % 2 == 1
                                       ? static_cast<double>(sizes[mid])
                                       : (static_cast<double>(sizes[mid - 1]) + static_cast<double>(sizes[mid])) / 2.0;
    }
    return s;
}

// --- filters -----------------------------------------------------------------

void FilterSpec::validate() const {
    if (from && to && days_between(*from, *to) < 0) {
        throw InvalidArgument(fmt::format("filter timeframe is reversed: {} > {}", format_iso_date(*from),
                                          format_iso_date(*to)));
    }
    if (max_case_duration_days && !(*max_case_duration_days > 0.0)) {
        throw InvalidArgument("max_case_duration_days must be positive");
    }
    if (max_events_per_case && *max_events_per_case == 0) {
        throw InvalidArgument("max_events_per_case must be positive");
    }
}

FilterSpec outlier_preset(Date base_date) {
    FilterSpec spec;
    spec.from = add_days(base_date, 7);
    spec.max_case_duration_days = 90.0;
    spec.max_events_per_case = 25;
    return spec;
}

bool case_passes(const Trace& trace, const FilterSpec& spec) {
    if (trace.events.empty()) return false;
    auto [lo, hi] = std::minmax_element(trace.events.begin(), trace.events.end(),
                                        [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    const Timestamp first = lo->timestamp;
    const Timestamp last = hi->timestamp;
    if (spec.from && last < at_midnight(*spec.from)) return false;
    if (spec.to && first >= at_midnight(add_days(*spec.to, 1))) return false;
    if (spec.max_case_duration_days && !(days_between(first, last) < *spec.max_case_duration_days)) return false;
    if (spec.max_events_per_case && trace.events.size() > *spec.max_events_per_case) return false;
    return true;
}

EventLog apply_filters(const EventLog& log, const FilterSpec& spec) {
    spec.validate();
    EventLog out;
    out.meta = log.meta;
    out.extensions = log.extensions;
    out.attributes = log.attributes;
    for (const auto& t : log.traces) {
        if (case_passes(t, spec)) out.traces.push_back(t);
    }
    out.meta.filtered_empty = out.traces.empty();
    return out;
}

}  // namespace abspm::eventlog
