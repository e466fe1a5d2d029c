#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abspm/eventlog.hpp"

namespace abspm::discovery {

using Activity = std::string;
using EdgeKey = std::pair<Activity, Activity>;

/// Durations in fractional days over all realizations of an edge.
struct DurationStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double total = 0.0;

    friend bool operator==(const DurationStats&, const DurationStats&) = default;
};

struct NodeMetrics {
    std::size_t absolute_frequency = 0;
    std::size_t case_frequency = 0;
    std::size_t max_repetitions = 0;
    double case_coverage = 0.0;

    friend bool operator==(const NodeMetrics&, const NodeMetrics&) = default;
};

struct EdgeMetrics {
    std::size_t absolute_frequency = 0;
    std::size_t case_frequency = 0;
    std::size_t max_repetitions = 0;
    DurationStats duration;

    friend bool operator==(const EdgeMetrics&, const EdgeMetrics&) = default;
};

/// Directly-follows graph. Maps keep every listing sorted by label.
struct Dfg {
    std::map<Activity, NodeMetrics> nodes;
    std::map<EdgeKey, EdgeMetrics> edges;
    std::map<Activity, std::size_t> start_activities;
    std::map<Activity, std::size_t> end_activities;
    std::size_t total_cases = 0;

    bool empty() const { return nodes.empty(); }

    friend bool operator==(const Dfg&, const Dfg&) = default;
};

/// Throws InvalidArgument for a log without events.
Dfg build_dfg(const eventlog::EventLog& log);

// --- indicators --------------------------------------------------------------

enum class Indicator {
    absolute_frequency,
    case_frequency,
    max_repetitions,
    case_coverage,
    min_duration,
    max_duration,
    mean_duration,
    median_duration,
    total_duration,
};

std::string_view indicator_name(Indicator indicator);
std::vector<std::string_view> indicator_names();

/// Throws InvalidArgument listing the valid names.
Indicator parse_indicator(std::string_view name);

/// Duration indicators are undefined on nodes.
std::optional<double> node_value(const Dfg& dfg, const NodeMetrics& node, Indicator indicator);
double edge_value(const Dfg& dfg, const EdgeMetrics& edge, Indicator indicator);

bool is_duration(Indicator indicator);

/// Display form used in model labels: counts as integers, coverage as a
/// rounded percentage, durations in days.
std::string format_indicator_value(Indicator indicator, double value);

// --- abstraction -------------------------------------------------------------

enum class AbstractionMode { frequency_rank, fuzzy };

std::string_view mode_name(AbstractionMode mode);
AbstractionMode parse_mode(std::string_view name);

struct AbstractionSpec {
    double activity_ratio = 1.0;
    double path_ratio = 1.0;
    AbstractionMode mode = AbstractionMode::frequency_rank;
    double utility_weight = 0.5;  // fuzzy: weight of significance against correlation
    double cutoff = 0.0;          // fuzzy: minimum edge utility

    /// Ranges are [0, 1]; activity_ratio must be positive.
    void validate() const;

    friend bool operator==(const AbstractionSpec&, const AbstractionSpec&) = default;
};

/// Number of elements a ratio retains out of `total`: ceil(ratio * total).
std::size_t retained_count(double ratio, std::size_t total);

/// Log restricted to the given activities; traces left empty are dropped.
eventlog::EventLog project(const eventlog::EventLog& log, const std::vector<Activity>& keep);

/// Activities ranked by absolute frequency (descending), ties by label.
std::vector<Activity> rank_activities(const Dfg& dfg);

/// Edges ranked by absolute frequency (descending), ties by (source, target).
std::vector<EdgeKey> rank_edges(const Dfg& dfg);

/// Every node's most frequent outgoing and incoming edge.
std::vector<EdgeKey> skeleton_edges(const Dfg& dfg);

/// Keeps the top activities, rebuilds the graph over the projected log, then
/// keeps the edge skeleton plus the most frequent edges up to the path ratio
/// (frequency_rank) or the edges passing the utility cutoff (fuzzy).
Dfg abstract(const Dfg& dfg, const eventlog::EventLog& log, const AbstractionSpec& spec);

// --- fuzzy significance / correlation ----------------------------------------

struct EdgeFuzzy {
    double significance = 0.0;
    double correlation = 0.0;
    double utility = 0.0;
};

struct FuzzyMetrics {
    std::map<Activity, double> node_significance;
    std::map<EdgeKey, EdgeFuzzy> edges;
};

/// Significance is frequency normalized by the maximum; correlation is
/// 1 / (1 + mean duration in days); utility = w * sig + (1 - w) * cor.
FuzzyMetrics fuzzy_metrics(const Dfg& dfg, double utility_weight);

/// Drops edges below the cutoff, then gives every node that lost all edges in
/// a direction back its highest-utility edge in that direction.
Dfg fuzzy_filter(const Dfg& dfg, const FuzzyMetrics& metrics, double cutoff);

// --- export ------------------------------------------------------------------

/// Graphviz rendering. Nodes are labelled `activity\nprimary (secondary)` and
/// filled on a five-step scale of the primary metric; edge pen width follows
/// the primary edge metric. Start and end activities are marked on the node.
std::string export_dot(const Dfg& dfg, Indicator primary, Indicator secondary);
std::string export_dot(const Dfg& dfg, std::string_view primary, std::string_view secondary);

std::string export_json(const Dfg& dfg);
Dfg dfg_from_json(std::string_view text);

}  // namespace abspm::discovery
