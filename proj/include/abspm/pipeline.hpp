#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abspm/project.hpp"

namespace abspm::pipeline {

// Each command reads its registered inputs, writes input-keyed artifacts,
// registers them, updates the matching phase and saves the project file.

struct SimulateSummary {
    int agents = 0;
    int steps = 0;
    bool converged = false;
    std::size_t records = 0;
    std::string raw_path;
};
SimulateSummary simulate(Project& project);

struct ConvertSummary {
    std::size_t cases = 0;
    std::size_t events = 0;
    std::string xes_path;
    std::string csv_path;
};
ConvertSummary convert(Project& project);

/// Statistics of the converted log.
eventlog::LogStats stats(Project& project);

struct FilterSummary {
    eventlog::LogStats before;
    eventlog::LogStats after;
    std::string xes_path;
};
FilterSummary filter(Project& project);

/// The log models are discovered from: the filtered log when present and
/// current, otherwise the converted log.
eventlog::EventLog modeling_log(const Project& project);

/// abstract(build_dfg(log)); an empty log yields an empty model.
discovery::Dfg discover_model(const eventlog::EventLog& log, const discovery::AbstractionSpec& spec);

struct DiscoverSummary {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::string dot_path;
    std::string json_path;
};
DiscoverSummary discover(Project& project);

/// Observations for the registered model, registering them on first use.
std::vector<assessment::Observation> prepare_observations(Project& project);

struct AssessSummary {
    std::size_t observations = 0;
    std::size_t recorded = 0;
    assessment::AssessmentReport report;
    std::string markdown_path;
};
/// Records `judgments` and writes the assessment report.
AssessSummary assess(Project& project, const std::vector<assessment::Judgment>& judgments);

struct ReportSummary {
    std::string path;
    std::vector<std::string> missing;
};
ReportSummary report(Project& project);
/// The report text alone; a pure function of the project state and artifacts.
std::string render_report(const Project& project, std::vector<std::string>* missing = nullptr);

/// Current UTC time as an ISO timestamp, for judgment records.
std::string now_timestamp();

}  // namespace abspm::pipeline
