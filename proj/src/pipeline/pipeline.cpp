#include "abspm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <fmt/format.h>

#include "abspm/digest.hpp"
#include "abspm/error.hpp"
#include "abspm/io.hpp"
#include "abspm/time.hpp"
#include "abspm/xes.hpp"

namespace abspm::pipeline {

namespace {

Json observation_requests_json(const AssessmentSettings& settings) {
    Json j = Json::array();
    for (const auto& r : settings.requests) {
        j.push_back({static_cast<int>(r.kind), discovery::indicator_name(r.indicator), r.top_k});
    }
    return j;
}

Json abstraction_json(const ProjectState& s) {
    return {{"activity_ratio", s.abstraction.activity_ratio},
            {"path_ratio", s.abstraction.path_ratio},
            {"mode", discovery::mode_name(s.abstraction.mode)},
            {"utility_weight", s.abstraction.utility_weight},
            {"cutoff", s.abstraction.cutoff},
            {"primary", discovery::indicator_name(s.primary)},
            {"secondary", discovery::indicator_name(s.secondary)}};
}

std::string percent(double ratio) {
    return fmt::format("{:g}%", ratio * 100.0);
}

std::optional<Json> read_json_artifact(const Project& project, std::string_view name) {
    if (!project.has(name)) return std::nullopt;
    auto path = project.root() / project.entry(name).path;
    if (!std::filesystem::exists(path)) return std::nullopt;
    return Json::parse(read_file(path));
}

}  // namespace

SimulateSummary simulate(Project& project) {
    auto& s = project.state();
    s.sim.validate();
    auto result = sim::run(s.sim);
    auto content = sim::to_raw_csv(result.records);

    Json key = {{"command", "simulate"}, {"seed", s.sim.seed}, {"config", to_json(s.sim)}};
    auto name = project.artifact_name("raw", "csv", key.dump());
    project.publish("raw_log", name, content, "simulate", {});

    SimulateSummary out{s.sim.agent_count(), result.steps_executed, result.converged, result.records.size(), name};
    project.set_phase(Phase::data_understanding, PhaseState::in_progress,
                      fmt::format("Simulated {} agents for {} steps ({}); {} raw records.", out.agents, out.steps,
                                  out.converged ? "converged" : "step limit reached", out.records));
    project.save();
    return out;
}

ConvertSummary convert(Project& project) {
    auto raw_path = project.require("raw_log");
    const auto& raw = project.entry("raw_log");
    auto records = sim::parse_raw_csv(read_file(raw_path));
    auto log = eventlog::convert(records, project.state().sim.base_date);
    log.meta.source_digest = raw.digest;

    auto key = fmt::format("convert\n{}\n{}", raw.digest, format_iso_date(project.state().sim.base_date));
    auto xes_name = project.artifact_name("log", "xes", key);
    auto csv_name = project.artifact_name("log", "csv", key);
    project.publish("event_log_xes", xes_name, eventlog::to_xes(log), "convert", {"raw_log"});
    project.publish("event_log_csv", csv_name, eventlog::to_log_csv(log), "convert", {"raw_log"});

    ConvertSummary out{log.traces.size(), log.event_count(), xes_name, csv_name};
    project.set_phase(Phase::data_understanding, PhaseState::in_progress,
                      fmt::format("Converted {} raw records into {} cases and {} events.", records.size(), out.cases,
                                  out.events));
    project.save();
    return out;
}

eventlog::LogStats stats(Project& project) {
    auto log = eventlog::read_xes(project.require("event_log_xes"));
    auto st = eventlog::stats(log);
    auto content = to_json(st).dump(2) + "\n";
    auto name = project.artifact_name("stats", "json", "stats\n" + project.entry("event_log_xes").digest);
    project.publish("log_stats", name, content, "stats", {"event_log_xes"});
    project.set_phase(Phase::data_understanding, PhaseState::done,
                      fmt::format("Event log has {} cases, {} events and {} distinct activities.", st.cases, st.events,
                                  st.activities));
    project.save();
    return st;
}

FilterSummary filter(Project& project) {
    const auto& s = project.state();
    const auto& spec = s.active_filter();
    spec.validate();
    auto log = eventlog::read_xes(project.require("event_log_xes"));
    auto filtered = eventlog::apply_filters(log, spec);

    FilterSummary out{eventlog::stats(log), eventlog::stats(filtered), {}};
    auto key = fmt::format("filter\n{}\n{}", project.entry("event_log_xes").digest, to_json(spec).dump());
    out.xes_path = project.artifact_name("filtered", "xes", key);
    Json summary = {{"preset", s.active_preset},
                    {"spec", to_json(spec)},
                    {"before", to_json(out.before)},
                    {"after", to_json(out.after)}};
    const std::string preset = s.active_preset;
    project.publish("filtered_log_xes", out.xes_path, eventlog::to_xes(filtered), "filter", {"event_log_xes"});
    project.publish("filtered_log_csv", project.artifact_name("filtered", "csv", key), eventlog::to_log_csv(filtered),
                    "filter", {"event_log_xes"});
    project.publish("filtered_stats", project.artifact_name("filtered-stats", "json", key), summary.dump(2) + "\n",
                    "filter", {"event_log_xes"});
    project.set_phase(Phase::data_preparation, PhaseState::done,
                      fmt::format("Preset {} kept {} of {} cases ({} of {} events).{}", preset, out.after.cases,
                                  out.before.cases, out.after.events, out.before.events,
                                  filtered.traces.empty() ? " The filtered log is empty." : ""));
    project.save();
    return out;
}

eventlog::EventLog modeling_log(const Project& project) {
    if (project.has("filtered_log_xes")) {
        const auto& f = project.entry("filtered_log_xes");
        auto it = f.inputs.find("event_log_xes");
        if (!project.has("event_log_xes") || it == f.inputs.end() ||
            it->second != project.entry("event_log_xes").digest) {
            throw PreconditionError("the filtered log predates the current event log; rerun `abspm filter`");
        }
        return eventlog::read_xes(project.require("filtered_log_xes"));
    }
    return eventlog::read_xes(project.require("event_log_xes"));
}

discovery::Dfg discover_model(const eventlog::EventLog& log, const discovery::AbstractionSpec& spec) {
    spec.validate();
    if (log.event_count() == 0) return discovery::Dfg{};
    return discovery::abstract(discovery::build_dfg(log), log, spec);
}

DiscoverSummary discover(Project& project) {
    const auto& s = project.state();
    const std::string source = project.has("filtered_log_xes") ? "filtered_log_xes" : "event_log_xes";
    auto log = modeling_log(project);
    auto dfg = discover_model(log, s.abstraction);

    auto key = fmt::format("discover\n{}\n{}", project.entry(source).digest, abstraction_json(s).dump());
    DiscoverSummary out{dfg.nodes.size(), dfg.edges.size(), project.artifact_name("model", "dot", key),
                        project.artifact_name("model", "json", key)};
    project.publish("model_json", out.json_path, discovery::export_json(dfg), "discover", {source});
    project.publish("model_dot", out.dot_path, discovery::export_dot(dfg, s.primary, s.secondary), "discover", {source});
    project.set_phase(Phase::modeling, PhaseState::done,
                      fmt::format("Directly-follows model with {} activities and {} paths at {} activities / {} paths.",
                                  out.nodes, out.edges, percent(s.abstraction.activity_ratio),
                                  percent(s.abstraction.path_ratio)));
    project.save();
    return out;
}

std::vector<assessment::Observation> prepare_observations(Project& project) {
    auto model = discovery::dfg_from_json(read_file(project.require("model_json")));
    auto obs = assessment::generate_observations(model, project.state().assessment.requests);
    auto key = fmt::format("observations\n{}\n{}", project.entry("model_json").digest,
                           observation_requests_json(project.state().assessment).dump());
    project.publish("observations", project.artifact_name("observations", "json", key),
                    assessment::observations_to_json(obs), "assess", {"model_json"});
    project.save();
    return obs;
}

AssessSummary assess(Project& project, const std::vector<assessment::Judgment>& judgments) {
    auto obs = prepare_observations(project);
    auto store = project.load_judgments();
    auto staged = store;
    for (const auto& j : judgments) staged.record(j, obs);  // validates every row before anything is written
    project.persist_judgments(staged, judgments);

    const auto& assessor = project.state().assessment.assessor;
    auto current = staged.current();
    AssessSummary out{obs.size(), judgments.size(), assessment::summarize(obs, current, assessor), {}};

    // keyed by the verdicts themselves, not by when they were recorded
    auto markdown = out.report.to_markdown();
    auto csv = out.report.to_csv();
    auto key = fmt::format("assessment\n{}\n{}\n{}", project.entry("observations").digest, assessor,
                           digest_hex(csv));
    out.markdown_path = project.artifact_name("assessment", "md", key);
    project.publish("assessment_md", out.markdown_path, markdown, "assess", {"observations"});
    project.publish("assessment_csv", project.artifact_name("assessment", "csv", key), csv, "assess",
                    {"observations"});

    std::string note;
    if (obs.empty()) {
        note = "No observations were generated from the model; the assessment report has zero rows.";
    } else {
        note = fmt::format("{} observations, {} fully judged, {} pending.", obs.size(),
                           obs.size() - out.report.pending.size(), out.report.pending.size());
    }
    project.set_phase(Phase::evaluation,
                      !obs.empty() && out.report.pending.empty() ? PhaseState::done : PhaseState::in_progress, note);
    project.save();
    return out;
}

// --- final report ------------------------------------------------------------------

namespace {

void phase_header(std::string& out, const ProjectState& s, Phase phase) {
    const auto& p = s.phases.at(phase);
    out += fmt::format("\n## {}. {}\n\nStatus: {}\n", static_cast<int>(phase) + 1, phase_title(phase),
                       phase_state_name(p.state));
    if (!p.note.empty()) out += fmt::format("\n{}\n", p.note);
    if (!p.checklist.empty()) {
        out += "\n";
        for (const auto& c : p.checklist) out += fmt::format("- [{}] {}\n", c.done ? "x" : " ", c.item);
    }
}

void stats_table(std::string& out, const Json& st) {
    out += "| Measure | Value |\n|---|---|\n";
    out += fmt::format("| Cases | {} |\n", st.at("cases").get<std::size_t>());
    out += fmt::format("| Events | {} |\n", st.at("events").get<std::size_t>());
    out += fmt::format("| Distinct activities | {} |\n", st.at("activities").get<std::size_t>());
    const auto& epc = st.at("events_per_case");
    out += fmt::format("| Events per case (min / median / max) | {} / {:g} / {} |\n", epc.at("min").get<std::size_t>(),
                       epc.at("median").get<double>(), epc.at("max").get<std::size_t>());
    auto ts = [](const Json& v) { return v.is_null() ? std::string("n/a") : v.get<std::string>(); };
    out += fmt::format("| First event | {} |\n", ts(st.at("first_timestamp")));
    out += fmt::format("| Last event | {} |\n", ts(st.at("last_timestamp")));
}

void pending(std::string& out, std::vector<std::string>& missing, std::string_view artifact, std::string_view command) {
    out += fmt::format("\n_pending: {} has not been produced; run `abspm {}`._\n", artifact, command);
    missing.emplace_back(artifact);
}

}  // namespace

std::string render_report(const Project& project, std::vector<std::string>* missing_out) {
    const auto& s = project.state();
    std::vector<std::string> missing;
    std::string out = "# Simulation assessment report\n";
    out += fmt::format("\nProject seed: {}. Population: {} agents.\n", s.sim.seed, s.population());

    phase_header(out, s, Phase::contextual_understanding);

    phase_header(out, s, Phase::data_understanding);
    out += "\n### Simulation configuration\n\n| Parameter | Value |\n|---|---|\n";
    out += fmt::format("| Grid | {} x {} |\n", s.sim.grid_width, s.sim.grid_height);
    out += fmt::format("| Density | {:g} |\n", s.sim.density);
    out += fmt::format("| Agents | {} |\n", s.sim.agent_count());
    out += fmt::format("| Tolerance | {:g} |\n", s.sim.tolerance);
    out += fmt::format("| Groups | {} |\n", s.sim.group_count);
    out += fmt::format("| Max steps | {} |\n", s.sim.max_steps);
    out += fmt::format("| Base date | {} |\n", format_iso_date(s.sim.base_date));
    out += "\n### Event log\n";
    if (!project.has("raw_log")) pending(out, missing, "raw_log", "simulate");
    if (!project.has("event_log_xes")) pending(out, missing, "event_log_xes", "convert");
    if (auto st = read_json_artifact(project, "log_stats")) {
        out += "\n";
        stats_table(out, *st);
        std::vector<std::pair<std::string, std::size_t>> freq;
        for (const auto& [a, n] : st->at("activity_frequency").items()) freq.emplace_back(a, n.get<std::size_t>());
        std::stable_sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        out += "\nMost frequent activities:\n\n| Activity | Events |\n|---|---|\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(10, freq.size()); ++i) {
            out += fmt::format("| {} | {} |\n", freq[i].first, freq[i].second);
        }
    } else {
        pending(out, missing, "log_stats", "stats");
    }

    phase_header(out, s, Phase::data_preparation);
    if (auto fs = read_json_artifact(project, "filtered_stats")) {
        out += fmt::format("\nFilter preset: {}\n\n", fs->at("preset").get<std::string>());
        const auto& spec = fs->at("spec");
        out += "| Filter | Value |\n|---|---|\n";
        out += fmt::format("| From | {} |\n", spec.value("from", "open"));
        out += fmt::format("| To | {} |\n", spec.value("to", "open"));
        out += fmt::format("| Case duration below (days) | {} |\n",
                           spec.contains("max_case_duration_days")
                               ? fmt::format("{:g}", spec["max_case_duration_days"].get<double>())
                               : std::string("none"));
        out += fmt::format("| Events per case at most | {} |\n",
                           spec.contains("max_events_per_case")
                               ? std::to_string(spec["max_events_per_case"].get<std::size_t>())
                               : std::string("none"));
        out += "\nAfter filtering:\n\n";
        stats_table(out, fs->at("after"));
    } else {
        pending(out, missing, "filtered_log_xes", "filter");
    }

    phase_header(out, s, Phase::modeling);
    out += "\n| Setting | Value |\n|---|---|\n";
    out += fmt::format("| Activities shown | {} |\n", percent(s.abstraction.activity_ratio));
    out += fmt::format("| Paths shown | {} |\n", percent(s.abstraction.path_ratio));
    out += fmt::format("| Mode | {} |\n", discovery::mode_name(s.abstraction.mode));
    out += fmt::format("| Primary indicator | {} |\n", discovery::indicator_name(s.primary));
    out += fmt::format("| Secondary indicator | {} |\n", discovery::indicator_name(s.secondary));
    if (auto model = read_json_artifact(project, "model_json")) {
        out += fmt::format("\nModel: {} activities, {} paths over {} cases.\n", model->at("nodes").size(),
                           model->at("edges").size(), model->at("total_cases").get<std::size_t>());
        out += fmt::format("Rendering: `{}` (DOT), `{}` (JSON).\n",
                           project.has("model_dot") ? project.entry("model_dot").path : std::string("pending"),
                           project.entry("model_json").path);
    } else {
        pending(out, missing, "model_json", "discover");
    }

    phase_header(out, s, Phase::evaluation);
    if (project.has("assessment_md") && std::filesystem::exists(project.root() / project.entry("assessment_md").path)) {
        std::istringstream md(read_file(project.root() / project.entry("assessment_md").path));
        std::string line;
        out += "\n";
        while (std::getline(md, line)) {
            if (line.starts_with("#")) line = "##" + line;
            out += line + "\n";
        }
    } else {
        pending(out, missing, "assessment_md", "assess");
    }

    phase_header(out, s, Phase::deployment);

    out += "\n## Artifacts\n\n| Name | Path | Digest |\n|---|---|---|\n";
    for (const auto& [name, e] : s.artifacts) {
        if (name == "report") continue;
        out += fmt::format("| {} | {} | {} |\n", name, e.path, e.digest);
    }
    auto warnings = project.staleness_warnings();
    std::erase_if(warnings, [](const std::string& w) { return w.starts_with("artifact report "); });
    if (!warnings.empty()) {
        out += "\n## Warnings\n\n";
        for (const auto& w : warnings) out += "- " + w + "\n";
    }
    if (!missing.empty()) {
        out += "\n## Missing artifacts\n\n";
        for (const auto& m : missing) out += "- " + m + "\n";
    }
    if (missing_out != nullptr) *missing_out = missing;
    return out;
}

ReportSummary report(Project& project) {
    ReportSummary out;
    auto text = render_report(project, &out.missing);
    out.path = project.artifact_name("report", "md", text);
    project.publish("report", out.path, text, "report", {});
    project.save();
    return out;
}

std::string now_timestamp() {
    return format_iso_timestamp(std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()));
}

}  // namespace abspm::pipeline
