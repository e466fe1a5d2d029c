#pragma once

// Per-activity and per-case counts computed straight from raw records,
// without going through the event log model.

#include <map>
#include <set>
#include <string>

#include "abspm/sim.hpp"

namespace oracle {

struct RawCounts {
    std::map<std::string, std::size_t> per_activity;
    std::size_t events = 0;
    std::size_t cases = 0;
    std::size_t min_per_case = 0;
    std::size_t max_per_case = 0;
};

inline RawCounts count_raw(const std::vector<abspm::sim::RawEventRecord>& records) {
    RawCounts out;
    std::map<unsigned, std::size_t> per_case;
    for (const auto& r : records) {
        std::string label;
        if (r.kind == abspm::sim::RecordKind::move) {
            label = "move_location";
        } else {
            label = std::string(r.happy ? "change_happy_" : "change_unhappy_") + std::to_string(r.neighbor_ids.size()) +
                    "_" + std::to_string(r.similar_count);
        }
        ++out.per_activity[label];
        ++per_case[r.agent_id];
        ++out.events;
    }
    out.cases = per_case.size();
    bool first = true;
    for (const auto& [id, n] : per_case) {
        if (first || n < out.min_per_case) out.min_per_case = n;
        if (first || n > out.max_per_case) out.max_per_case = n;
        first = false;
    }
    return out;
}

}  // namespace oracle
