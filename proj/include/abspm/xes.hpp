#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "abspm/eventlog.hpp"

namespace abspm::eventlog {

/// Standard XES 1.0 document: Concept and Time extensions, one trace per case
/// named by concept:name, events with concept:name and time:timestamp, then
/// the remaining attributes in stored order.
std::string to_xes(const EventLog& log);

/// Inverse of to_xes. Foreign attributes and extension declarations are kept
/// as opaque attributes. Throws ParseError naming the line and element of the
/// first violation.
EventLog parse_xes(std::string_view text);

void write_xes(const EventLog& log, const std::filesystem::path& path);
EventLog read_xes(const std::filesystem::path& path);

}  // namespace abspm::eventlog
