#include <algorithm>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "abspm/csv.hpp"
#include "abspm/error.hpp"
#include "abspm/eventlog.hpp"
#include "abspm/io.hpp"

namespace abspm::eventlog {

namespace {

constexpr std::string_view kHeader = "Date,Activity,CaseID";

struct RowRef {
    const Event* event;
    const Trace* trace;
    std::size_t trace_index;
};

}  // namespace

std::string to_log_csv(const EventLog& log) {
    std::vector<RowRef> rows;
    rows.reserve(log.event_count());
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
        for (const auto& e : log.traces[i].events) rows.push_back({&e, &log.traces[i], i});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RowRef& a, const RowRef& b) {
        if (event_before(*a.event, *b.event)) return true;
        if (event_before(*b.event, *a.event)) return false;
        return a.trace_index < b.trace_index;
    });

    std::string out(kHeader);
    out.push_back('\n');
    for (const auto& r : rows) {
        out += fmt::format("{},{},{}\n", format_dotted_date(date_of(r.event->timestamp)),
                           csv::quote_if_needed(r.event->activity), csv::quote_if_needed(r.trace->case_id));
    }
    return out;
}

EventLog parse_log_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<Trace> traces;
    std::map<std::string, std::size_t> index;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != kHeader) throw ParseError(fmt::format("log csv line 1: expected header '{}'", kHeader));
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        auto f = csv::split_row(line);
        if (f.size() != 3) throw ParseError(fmt::format("log csv line {}: expected 3 fields, found {}", line_no, f.size()));
        std::optional<Timestamp> ts;
        if (auto d = parse_date(f[0])) {
            ts = at_midnight(*d);
        } else {
            ts = parse_timestamp(f[0]);
        }
        if (!ts) throw ParseError(fmt::format("log csv line {}: unreadable date '{}'", line_no, f[0]));
        if (f[1].empty()) throw ParseError(fmt::format("log csv line {}: empty activity", line_no));
        if (f[2].empty()) throw ParseError(fmt::format("log csv line {}: empty case id", line_no));

        auto [it, inserted] = index.try_emplace(f[2], traces.size());
        if (inserted) traces.push_back(Trace{f[2], {}, {}});
        traces[it->second].events.push_back(Event{f[1], *ts, {}});
    }
    if (!header_seen) throw ParseError("log csv: missing header");

    EventLog log;
    for (auto& t : traces) {
        std::stable_sort(t.events.begin(), t.events.end(),
                         [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    }
    log.traces = std::move(traces);
    return log;
}

void write_log_csv(const EventLog& log, const std::filesystem::path& path) {
    try {
        write_file_atomic(path, to_log_csv(log));
    } catch (const IoError& e) {
        throw IoError(fmt::format("writing log csv {}: {}", path.string(), e.what()));
    }
}

EventLog read_log_csv(const std::filesystem::path& path) {
    std::string text = read_file(path);
    try {
        return parse_log_csv(text);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace abspm::eventlog
