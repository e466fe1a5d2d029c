#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abspm/sim.hpp"
#include "abspm/time.hpp"

namespace abspm::eventlog {

/// Typed XES attribute. `type` is the XES element name (string, int, float,
/// boolean, date, id, list, container); the value is kept as its literal text
/// so that attributes the library does not interpret survive a round trip.
struct Attribute {
    std::string key;
    std::string type;
    std::string value;
    std::vector<Attribute> children;

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

const Attribute* find_attribute(std::span<const Attribute> attributes, std::string_view key);
std::optional<std::int64_t> int_attribute(std::span<const Attribute> attributes, std::string_view key);

inline constexpr std::string_view kStepKey = "step";
inline constexpr std::string_view kStepCounterKey = "step_counter";

struct Event {
    std::string activity;
    Timestamp timestamp;
    std::vector<Attribute> attributes;

    friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;
    std::vector<Attribute> attributes;

    friend bool operator==(const Trace&, const Trace&) = default;
};

struct Extension {
    std::string name;
    std::string prefix;
    std::string uri;

    friend bool operator==(const Extension&, const Extension&) = default;
};

struct LogMetadata {
    std::string name;
    std::string source_digest;
    std::optional<Date> base_date;
    /// Set by apply_filters when no case survived.
    bool filtered_empty = false;

    friend bool operator==(const LogMetadata&, const LogMetadata&) = default;
};

struct EventLog {
    std::vector<Trace> traces;
    LogMetadata meta;
    std::vector<Extension> extensions;  // beyond Concept and Time
    std::vector<Attribute> attributes;  // unrecognized log-level attributes

    std::size_t event_count() const;
    std::size_t case_count() const { return traces.size(); }
    bool empty() const { return traces.empty(); }

    friend bool operator==(const EventLog&, const EventLog&) = default;
};

// --- activity labels ---------------------------------------------------------

inline constexpr std::string_view kMoveActivity = "move_location";

enum class LabelKind { move, change_happy, change_unhappy };

struct ActivityLabel {
    LabelKind kind = LabelKind::move;
    int neighbors = 0;  // X
    int similar = 0;    // Y

    friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
};

/// `move_location` or `change_(happy|unhappy)_X_Y` with 0 <= Y <= X <= 8.
std::optional<ActivityLabel> parse_activity(std::string_view label);
std::string format_activity(const ActivityLabel& label);

// --- conversion --------------------------------------------------------------

class ConversionError : public Error {
public:
    ConversionError(std::uint64_t event_no, const std::string& message);
    std::uint64_t event_no() const { return event_no_; }

private:
    std::uint64_t event_no_;
};

/// One trace per agent that owns at least one record, ordered by agent id.
/// Timestamps are midnight of base_date + step; step and step_counter are
/// kept as integer attributes for within-day ordering.
EventLog convert(std::span<const sim::RawEventRecord> records, Date base_date);

/// Ordering key inside a trace: (timestamp, step_counter). Events without a
/// step_counter sort as counter 0.
bool event_before(const Event& a, const Event& b);

// --- statistics --------------------------------------------------------------

struct LogStats {
    std::size_t events = 0;
    std::size_t cases = 0;
    std::size_t activities = 0;
    std::size_t min_events_per_case = 0;
    double median_events_per_case = 0.0;
    std::size_t max_events_per_case = 0;
    std::optional<Timestamp> first_timestamp;
    std::optional<Timestamp> last_timestamp;
    std::map<std::string, std::size_t> activity_frequency;
    /// Cases holding two events that cannot be ordered: same timestamp and
    /// same (or missing) step_counter.
    std::size_t duplicate_timestamp_cases = 0;
    /// Events whose activity does not match the label grammar.
    std::size_t label_violations = 0;

    friend bool operator==(const LogStats&, const LogStats&) = default;
};

LogStats stats(const EventLog& log);

// --- filters -----------------------------------------------------------------

/// Whole-case filters. Every bound that is set must hold for a case to be
/// kept; events are never dropped individually.
struct FilterSpec {
    /// Case [first, last] must intersect [from, to]; to is inclusive of the
    /// whole day, either end may be open.
    std::optional<Date> from;
    std::optional<Date> to;
    /// Strict: last - first < bound (fractional days).
    std::optional<double> max_case_duration_days;
    /// Inclusive: event count <= bound.
    std::optional<std::size_t> max_events_per_case;

    bool has_timeframe() const { return from.has_value() || to.has_value(); }
    void validate() const;

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// from = base + 7 days, duration < 90 days, at most 25 events.
FilterSpec outlier_preset(Date base_date);

bool case_passes(const Trace& trace, const FilterSpec& spec);
EventLog apply_filters(const EventLog& log, const FilterSpec& spec);

// --- Date,Activity,CaseID csv ---------------------------------------------------

/// Rows ordered by (timestamp, step_counter, trace order); dates as DD.MM.YYYY.
std::string to_log_csv(const EventLog& log);
EventLog parse_log_csv(std::string_view text);
void write_log_csv(const EventLog& log, const std::filesystem::path& path);
EventLog read_log_csv(const std::filesystem::path& path);

}  // namespace abspm::eventlog
