#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "abspm/dfg.hpp"
#include "abspm/error.hpp"

namespace abspm::discovery {

std::string_view mode_name(AbstractionMode mode) {
    return mode == AbstractionMode::fuzzy ? "fuzzy" : "frequency_rank";
}

AbstractionMode parse_mode(std::string_view name) {
    if (name == "frequency_rank" || name == "frequency") return AbstractionMode::frequency_rank;
    if (name == "fuzzy") return AbstractionMode::fuzzy;
    throw InvalidArgument(fmt::format("unknown abstraction mode '{}'; valid modes: frequency_rank, fuzzy", name));
}

void AbstractionSpec::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(activity_ratio)) throw InvalidArgument(fmt::format("activity ratio {} outside [0, 1]", activity_ratio));
    if (activity_ratio == 0.0) throw InvalidArgument("activity ratio 0 leaves an empty model");
    if (!in_unit(path_ratio)) throw InvalidArgument(fmt::format("path ratio {} outside [0, 1]", path_ratio));
    if (!in_unit(utility_weight)) throw InvalidArgument(fmt::format("utility weight {} outside [0, 1]", utility_weight));
    if (!in_unit(cutoff)) throw InvalidArgument(fmt::format("cutoff {} outside [0, 1]", cutoff));
}

std::size_t retained_count(double ratio, std::size_t total) {
    // tolerate representation error such as 0.15 * 20 = 3.0000000000000004
    double raw = ratio * static_cast<double>(total);
    return std::min(total, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

eventlog::EventLog project(const eventlog::EventLog& log, const std::vector<Activity>& keep) {
    std::set<Activity> allowed(keep.begin(), keep.end());
    eventlog::EventLog out;
    out.meta = log.meta;
    out.extensions = log.extensions;
    out.attributes = log.attributes;
    for (const auto& t : log.traces) {
        eventlog::Trace projected{t.case_id, {}, t.attributes};
        for (const auto& e : t.events) {
            if (allowed.contains(e.activity)) projected.events.push_back(e);
        }
        if (!projected.events.empty()) out.traces.push_back(std::move(projected));
    }
    return out;
}

std::vector<Activity> rank_activities(const Dfg& dfg) {
    std::vector<Activity> ranked;
    for (const auto& [activity, m] : dfg.nodes) ranked.push_back(activity);
    std::stable_sort(ranked.begin(), ranked.end(), [&](const Activity& a, const Activity& b) {
        return dfg.nodes.at(a).absolute_frequency > dfg.nodes.at(b).absolute_frequency;
    });
    return ranked;
}

std::vector<EdgeKey> rank_edges(const Dfg& dfg) {
    std::vector<EdgeKey> ranked;
    for (const auto& [key, m] : dfg.edges) ranked.push_back(key);
    std::stable_sort(ranked.begin(), ranked.end(), [&](const EdgeKey& a, const EdgeKey& b) {
        return dfg.edges.at(a).absolute_frequency > dfg.edges.at(b).absolute_frequency;
    });
    return ranked;
}

std::vector<EdgeKey> skeleton_edges(const Dfg& dfg) {
    std::map<Activity, const EdgeKey*> best_out, best_in;
    // edges iterate in key order, so strict > keeps the smallest key on ties
    for (const auto& [key, m] : dfg.edges) {
        auto consider = [&](std::map<Activity, const EdgeKey*>& best, const Activity& node) {
            auto it = best.find(node);
            if (it == best.end() || m.absolute_frequency > dfg.edges.at(*it->second).absolute_frequency) {
                best[node] = &key;
            }
        };
        consider(best_out, key.first);
        consider(best_in, key.second);
    }
    std::set<EdgeKey> chosen;
    for (const auto& [node, key] : best_out) chosen.insert(*key);
    for (const auto& [node, key] : best_in) chosen.insert(*key);
    return {chosen.begin(), chosen.end()};
}

namespace {

Dfg with_edges(const Dfg& dfg, const std::set<EdgeKey>& keep) {
    Dfg out = dfg;
    for (auto it = out.edges.begin(); it != out.edges.end();) {
        it = keep.contains(it->first) ? std::next(it) : out.edges.erase(it);
    }
    return out;
}

}  // namespace

Dfg abstract(const Dfg& dfg, const eventlog::EventLog& log, const AbstractionSpec& spec) {
    spec.validate();
    auto ranked = rank_activities(dfg);
    std::size_t keep_n = std::max<std::size_t>(1, retained_count(spec.activity_ratio, ranked.size()));
    ranked.resize(std::min(keep_n, ranked.size()));

    Dfg projected = keep_n >= dfg.nodes.size() ? build_dfg(log) : build_dfg(project(log, ranked));

    if (spec.mode == AbstractionMode::fuzzy) {
        return fuzzy_filter(projected, fuzzy_metrics(projected, spec.utility_weight), spec.cutoff);
    }

    auto skeleton = skeleton_edges(projected);
    std::set<EdgeKey> keep(skeleton.begin(), skeleton.end());
    const std::size_t target = retained_count(spec.path_ratio, projected.edges.size());
    for (const auto& key : rank_edges(projected)) {
        if (keep.size() >= target) break;
        keep.insert(key);
    }
    return with_edges(projected, keep);
}

FuzzyMetrics fuzzy_metrics(const Dfg& dfg, double utility_weight) {
    FuzzyMetrics out;
    std::size_t max_node = 0, max_edge = 0;
    for (const auto& [a, m] : dfg.nodes) max_node = std::max(max_node, m.absolute_frequency);
    for (const auto& [k, m] : dfg.edges) max_edge = std::max(max_edge, m.absolute_frequency);
    for (const auto& [a, m] : dfg.nodes) {
        out.node_significance[a] =
            max_node == 0 ? 0.0 : static_cast<double>(m.absolute_frequency) / static_cast<double>(max_node);
    }
    for (const auto& [k, m] : dfg.edges) {
        EdgeFuzzy f;
        f.significance = max_edge == 0 ? 0.0 : static_cast<double>(m.absolute_frequency) / static_cast<double>(max_edge);
        f.correlation = 1.0 / (1.0 + std::max(0.0, m.duration.mean));
        f.utility = utility_weight * f.significance + (1.0 - utility_weight) * f.correlation;
        out.edges[k] = f;
    }
    return out;
}

Dfg fuzzy_filter(const Dfg& dfg, const FuzzyMetrics& metrics, double cutoff) {
    auto utility = [&](const EdgeKey& k) {
        auto it = metrics.edges.find(k);
        return it == metrics.edges.end() ? 0.0 : it->second.utility;
    };

    std::set<EdgeKey> keep;
    for (const auto& [k, m] : dfg.edges) {
        if (utility(k) >= cutoff) keep.insert(k);
    }

    auto has_out = [&](const std::set<EdgeKey>& s, const Activity& n) {
        return std::any_of(s.begin(), s.end(), [&](const EdgeKey& k) { return k.first == n; });
    };
    auto has_in = [&](const std::set<EdgeKey>& s, const Activity& n) {
        return std::any_of(s.begin(), s.end(), [&](const EdgeKey& k) { return k.second == n; });
    };
    auto best = [&](auto&& matches) -> std::optional<EdgeKey> {
        std::optional<EdgeKey> pick;
        for (const auto& [k, m] : dfg.edges) {
            if (!matches(k)) continue;
            if (!pick || utility(k) > utility(*pick)) pick = k;
        }
        return pick;
    };

    std::set<EdgeKey> all;
    for (const auto& [k, m] : dfg.edges) all.insert(k);
    for (const auto& [node, m] : dfg.nodes) {
        if (has_out(all, node) && !has_out(keep, node)) {
            if (auto k = best([&](const EdgeKey& e) { return e.first == node; })) keep.insert(*k);
        }
        if (has_in(all, node) && !has_in(keep, node)) {
            if (auto k = best([&](const EdgeKey& e) { return e.second == node; })) keep.insert(*k);
        }
    }
    return with_edges(dfg, keep);
}

}  // namespace abspm::discovery
