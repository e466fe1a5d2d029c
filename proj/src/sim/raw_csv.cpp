#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "abspm/csv.hpp"
#include "abspm/error.hpp"
#include "abspm/io.hpp"
#include "abspm/sim.hpp"

namespace abspm::sim {

namespace {

constexpr std::string_view kHeader = "EventNo,Step,StepCounter,AgentID,Kind,PrevLoc,NewLoc,Neighbors,Similar,Happy";

template <typename Int>
Int parse_int(std::string_view text, std::size_t line, std::string_view column) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(fmt::format("raw csv line {}: column {}: '{}' is not an integer", line, column, text));
    }
    return value;
}

Location parse_location(std::string_view text, std::size_t line, std::string_view column) {
    if (text.size() < 5 || text.front() != '(' || text.back() != ')') {
        throw ParseError(fmt::format("raw csv line {}: column {}: expected '(x, y)', got '{}'", line, column, text));
    }
    text = text.substr(1, text.size() - 2);
    auto comma = text.find(',');
    if (comma == std::string_view::npos) {
        throw ParseError(fmt::format("raw csv line {}: column {}: expected '(x, y)'", line, column));
    }
    return {parse_int<int>(text.substr(0, comma), line, column), parse_int<int>(text.substr(comma + 1), line, column)};
}

std::vector<AgentId> parse_ids(std::string_view text, std::size_t line) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
        throw ParseError(fmt::format("raw csv line {}: column Neighbors: expected '[id, ...]', got '{}'", line, text));
    }
    text = text.substr(1, text.size() - 2);
    std::vector<AgentId> ids;
    while (!text.empty()) {
        auto comma = text.find(',');
        ids.push_back(parse_int<AgentId>(text.substr(0, comma), line, "Neighbors"));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return ids;
}

}  // namespace

std::string format_location(Location loc) {
    return fmt::format("({}, {})", loc.x, loc.y);
}

std::string format_neighbors(std::span<const AgentId> ids) {
    return fmt::format("[{}]", fmt::join(ids, ", "));
}

std::string raw_csv_header() {
    return std::string(kHeader);
}

std::string format_raw_row(const RawEventRecord& r) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{}", r.event_no, r.step, r.step_counter, r.agent_id,
                       r.kind == RecordKind::move ? "move" : "status",
                       r.prev_loc ? csv::quote(format_location(*r.prev_loc)) : std::string{},
                       csv::quote(format_location(r.new_loc)), csv::quote(format_neighbors(r.neighbor_ids)),
                       r.similar_count, r.happy ? "true" : "false");
}

std::string to_raw_csv(std::span<const RawEventRecord> records) {
    std::string out(kHeader);
    out.push_back('\n');
    for (const auto& r : records) {
        out += format_raw_row(r);
        out.push_back('\n');
    }
    return out;
}

std::vector<RawEventRecord> parse_raw_csv(std::string_view text) {
    std::vector<RawEventRecord> records;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != kHeader) throw ParseError(fmt::format("raw csv line 1: unexpected header '{}'", line));
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        auto f = csv::split_row(line);
        if (f.size() != 10) {
            throw ParseError(fmt::format("raw csv line {}: expected 10 fields, found {}", line_no, f.size()));
        }
        RawEventRecord r;
        r.event_no = parse_int<std::uint64_t>(f[0], line_no, "EventNo");
        r.step = parse_int<int>(f[1], line_no, "Step");
        r.step_counter = parse_int<int>(f[2], line_no, "StepCounter");
        r.agent_id = parse_int<AgentId>(f[3], line_no, "AgentID");
        if (f[4] == "move") {
            r.kind = RecordKind::move;
        } else if (f[4] == "status") {
            r.kind = RecordKind::status;
        } else {
            throw ParseError(fmt::format("raw csv line {}: column Kind: unknown kind '{}'", line_no, f[4]));
        }
        if (!f[5].empty()) r.prev_loc = parse_location(f[5], line_no, "PrevLoc");
        r.new_loc = parse_location(f[6], line_no, "NewLoc");
        r.neighbor_ids = parse_ids(f[7], line_no);
        r.similar_count = parse_int<int>(f[8], line_no, "Similar");
        if (f[9] == "true") {
            r.happy = true;
        } else if (f[9] == "false") {
            r.happy = false;
        } else {
            throw ParseError(fmt::format("raw csv line {}: column Happy: expected true/false, got '{}'", line_no, f[9]));
        }
        records.push_back(std::move(r));
    }
    if (!header_seen) throw ParseError("raw csv: missing header");
    return records;
}

void write_raw_csv(const SimResult& result, const std::filesystem::path& path) {
    try {
        write_file_atomic(path, to_raw_csv(result.records));
    } catch (const IoError& e) {
        throw IoError(fmt::format("writing raw log {}: {}", path.string(), e.what()));
    }
}

std::vector<RawEventRecord> read_raw_csv(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw IoError(fmt::format("reading raw log {}: {}", path.string(), e.what()));
    }
    try {
        return parse_raw_csv(text);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace abspm::sim
