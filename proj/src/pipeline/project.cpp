#include "abspm/project.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "abspm/digest.hpp"
#include "abspm/error.hpp"
#include "abspm/io.hpp"
#include "abspm/time.hpp"

namespace abspm::pipeline {

namespace fs = std::filesystem;
using discovery::Indicator;

namespace {

constexpr std::string_view kPhaseNames[] = {"contextual_understanding", "data_understanding", "data_preparation",
                                            "modeling", "evaluation", "deployment"};
constexpr std::string_view kPhaseTitles[] = {"Contextual understanding", "Data understanding", "Data preparation",
                                             "Modeling", "Evaluation", "Deployment"};
constexpr std::string_view kStateNames[] = {"pending", "in_progress", "done"};

// Which command produces each registered artifact, for precondition messages.
std::string_view producer_of(std::string_view name) {
    if (name == "raw_log") return "simulate";
    if (name == "event_log_xes" || name == "event_log_csv") return "convert";
    if (name == "log_stats") return "stats";
    if (name.starts_with("filtered")) return "filter";
    if (name.starts_with("model")) return "discover";
    if (name == "observations" || name.starts_with("assessment")) return "assess";
    if (name == "report") return "report";
    return "the producing command";
}

Date date_field(const Json& j, const char* key) {
    auto text = j.at(key).get<std::string>();
    auto d = parse_date(text);
    if (!d) throw InvalidArgument(fmt::format("{}: '{}' is not a date (YYYY-MM-DD)", key, text));
    return *d;
}

std::map<Phase, PhaseStatus> default_phases() {
    std::map<Phase, PhaseStatus> phases;
    for (Phase p : kPhases) phases[p] = PhaseStatus{};
    phases[Phase::contextual_understanding].note =
        "Face validity of a Schelling segregation model, judged by a domain expert on process-mining views.";
    phases[Phase::contextual_understanding].checklist = {
        {"Goals of the assessment agreed", false},
        {"Domain expert identified", false},
        {"Timeline, steps and resources planned", false},
    };
    phases[Phase::deployment].checklist = {
        {"Report reviewed with the expert", false},
        {"Follow-up decisions recorded", false},
    };
    return phases;
}

}  // namespace

std::string_view phase_name(Phase phase) { return kPhaseNames[static_cast<int>(phase)]; }
std::string_view phase_title(Phase phase) { return kPhaseTitles[static_cast<int>(phase)]; }

Phase parse_phase(std::string_view name) {
    for (Phase p : kPhases) {
        if (phase_name(p) == name) return p;
    }
    throw InvalidArgument(fmt::format("unknown phase '{}'", name));
}

std::string_view phase_state_name(PhaseState state) { return kStateNames[static_cast<int>(state)]; }

PhaseState parse_phase_state(std::string_view name) {
    for (int i = 0; i < 3; ++i) {
        if (kStateNames[i] == name) return static_cast<PhaseState>(i);
    }
    throw InvalidArgument(fmt::format("unknown phase status '{}'; expected pending, in_progress or done", name));
}

const eventlog::FilterSpec& ProjectState::active_filter() const {
    auto it = filter_presets.find(active_preset);
    if (it == filter_presets.end()) throw InvalidArgument(fmt::format("unknown filter preset '{}'", active_preset));
    return it->second;
}

std::size_t ProjectState::population() const {
    return assessment.population.value_or(static_cast<std::size_t>(sim.agent_count()));
}

ProjectState default_state(std::uint64_t seed) {
    ProjectState s;
    s.sim.seed = seed;
    s.filter_presets[std::string(kOutlierPreset)] = eventlog::outlier_preset(s.sim.base_date);
    s.filter_presets[std::string(kNoFilterPreset)] = eventlog::FilterSpec{};
    s.phases = default_phases();
    return s;
}

// --- json ----------------------------------------------------------------------

Json to_json(const eventlog::FilterSpec& spec) {
    Json j = Json::object();
    if (spec.from) j["from"] = format_iso_date(*spec.from);
    if (spec.to) j["to"] = format_iso_date(*spec.to);
    if (spec.max_case_duration_days) j["max_case_duration_days"] = *spec.max_case_duration_days;
    if (spec.max_events_per_case) j["max_events_per_case"] = *spec.max_events_per_case;
    return j;
}

eventlog::FilterSpec filter_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("filter spec must be a JSON object");
    static const std::set<std::string> known = {"from", "to", "max_case_duration_days", "max_events_per_case"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw InvalidArgument(fmt::format("unknown filter field '{}'", key));
    }
    eventlog::FilterSpec spec;
    try {
        if (j.contains("from") && !j["from"].is_null()) spec.from = date_field(j, "from");
        if (j.contains("to") && !j["to"].is_null()) spec.to = date_field(j, "to");
        if (j.contains("max_case_duration_days") && !j["max_case_duration_days"].is_null()) {
            if (!j["max_case_duration_days"].is_number()) throw InvalidArgument("max_case_duration_days must be a number");
            spec.max_case_duration_days = j["max_case_duration_days"].get<double>();
        }
        if (j.contains("max_events_per_case") && !j["max_events_per_case"].is_null()) {
            const auto& v = j["max_events_per_case"];
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw InvalidArgument("max_events_per_case must be a non-negative integer");
            }
            spec.max_events_per_case = v.get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("filter spec: {}", e.what()));
    }
    spec.validate();
    return spec;
}

Json to_json(const sim::SimConfig& c) {
    Json j;
    j["grid_width"] = c.grid_width;
    j["grid_height"] = c.grid_height;
    j["density"] = c.density;
    j["tolerance"] = c.tolerance;
    j["group_count"] = c.group_count;
    j["max_steps"] = c.max_steps;
    j["emit_initial_status"] = c.emit_initial_status;
    j["base_date"] = format_iso_date(c.base_date);
    return j;
}

Json to_json(const eventlog::LogStats& s) {
    Json j;
    j["events"] = s.events;
    j["cases"] = s.cases;
    j["activities"] = s.activities;
    j["events_per_case"] = {{"min", s.min_events_per_case},
                            {"median", s.median_events_per_case},
                            {"max", s.max_events_per_case}};
    j["first_timestamp"] = s.first_timestamp ? Json(format_iso_timestamp(*s.first_timestamp)) : Json(nullptr);
    j["last_timestamp"] = s.last_timestamp ? Json(format_iso_timestamp(*s.last_timestamp)) : Json(nullptr);
    Json freq = Json::object();
    for (const auto& [activity, n] : s.activity_frequency) freq[activity] = n;
    j["activity_frequency"] = std::move(freq);
    j["duplicate_timestamp_cases"] = s.duplicate_timestamp_cases;
    j["label_violations"] = s.label_violations;
    return j;
}

Json to_json(const ProjectState& s) {
    Json j;
    j["format"] = "abspm-project/1";
    j["seed"] = s.sim.seed;
    j["simulation"] = to_json(s.sim);

    Json presets = Json::object();
    for (const auto& [name, spec] : s.filter_presets) presets[name] = to_json(spec);
    j["filter"] = {{"active_preset", s.active_preset}, {"presets", std::move(presets)}};

    j["abstraction"] = {{"activity_ratio", s.abstraction.activity_ratio},
                        {"path_ratio", s.abstraction.path_ratio},
                        {"mode", discovery::mode_name(s.abstraction.mode)},
                        {"utility_weight", s.abstraction.utility_weight},
                        {"cutoff", s.abstraction.cutoff},
                        {"primary", discovery::indicator_name(s.primary)},
                        {"secondary", discovery::indicator_name(s.secondary)}};

    Json requests = Json::array();
    for (const auto& r : s.assessment.requests) {
        requests.push_back({{"element", r.kind == assessment::ElementKind::activity ? "activity" : "path"},
                            {"indicator", discovery::indicator_name(r.indicator)},
                            {"top_k", r.top_k}});
    }
    j["assessment"] = {{"assessor", s.assessment.assessor},
                       {"population", s.assessment.population ? Json(*s.assessment.population) : Json(nullptr)},
                       {"observations", std::move(requests)}};

    Json phases = Json::object();
    for (const auto& [phase, status] : s.phases) {
        Json checklist = Json::array();
        for (const auto& c : status.checklist) checklist.push_back({{"item", c.item}, {"done", c.done}});
        phases[std::string(phase_name(phase))] = {
            {"status", phase_state_name(status.state)}, {"note", status.note}, {"checklist", std::move(checklist)}};
    }
    j["phases"] = std::move(phases);

    Json artifacts = Json::object();
    for (const auto& [name, a] : s.artifacts) {
        Json inputs = Json::object();
        for (const auto& [in, digest] : a.inputs) inputs[in] = digest;
        artifacts[name] = {{"path", a.path}, {"digest", a.digest}, {"command", a.command}, {"inputs", std::move(inputs)}};
    }
    j["artifacts"] = std::move(artifacts);
    return j;
}

ProjectState state_from_json(const Json& j) {
    try {
        if (j.value("format", "") != "abspm-project/1") throw ParseError("project file: unsupported format");
        ProjectState s;
        const auto& sim = j.at("simulation");
        s.sim.seed = j.at("seed").get<std::uint64_t>();
        s.sim.grid_width = sim.at("grid_width").get<int>();
        s.sim.grid_height = sim.at("grid_height").get<int>();
        s.sim.density = sim.at("density").get<double>();
        s.sim.tolerance = sim.at("tolerance").get<double>();
        s.sim.group_count = sim.at("group_count").get<int>();
        s.sim.max_steps = sim.at("max_steps").get<int>();
        s.sim.emit_initial_status = sim.value("emit_initial_status", true);
        s.sim.base_date = date_field(sim, "base_date");
        s.sim.validate();

        const auto& filter = j.at("filter");
        s.active_preset = filter.at("active_preset").get<std::string>();
        for (const auto& [name, spec] : filter.at("presets").items()) s.filter_presets[name] = filter_from_json(spec);
        (void)s.active_filter();

        const auto& a = j.at("abstraction");
        s.abstraction.activity_ratio = a.at("activity_ratio").get<double>();
        s.abstraction.path_ratio = a.at("path_ratio").get<double>();
        s.abstraction.mode = discovery::parse_mode(a.at("mode").get<std::string>());
        s.abstraction.utility_weight = a.at("utility_weight").get<double>();
        s.abstraction.cutoff = a.at("cutoff").get<double>();
        s.abstraction.validate();
        s.primary = discovery::parse_indicator(a.at("primary").get<std::string>());
        s.secondary = discovery::parse_indicator(a.at("secondary").get<std::string>());

        const auto& as = j.at("assessment");
        s.assessment.assessor = as.at("assessor").get<std::string>();
        if (!as.at("population").is_null()) s.assessment.population = as.at("population").get<std::size_t>();
        s.assessment.requests.clear();
        for (const auto& r : as.at("observations")) {
            assessment::ObservationRequest req;
            auto element = r.at("element").get<std::string>();
            if (element != "activity" && element != "path") {
                throw InvalidArgument(fmt::format("unknown observation element '{}'", element));
            }
            req.kind = element == "activity" ? assessment::ElementKind::activity : assessment::ElementKind::path;
            req.indicator = discovery::parse_indicator(r.at("indicator").get<std::string>());
            req.top_k = r.at("top_k").get<std::size_t>();
            s.assessment.requests.push_back(req);
        }

        for (const auto& [name, p] : j.at("phases").items()) {
            PhaseStatus status;
            status.state = parse_phase_state(p.at("status").get<std::string>());
            status.note = p.value("note", "");
            for (const auto& c : p.value("checklist", Json::array())) {
                status.checklist.push_back({c.at("item").get<std::string>(), c.value("done", false)});
            }
            s.phases[parse_phase(name)] = std::move(status);
        }
        for (Phase p : kPhases) s.phases.try_emplace(p);

        for (const auto& [name, a2] : j.at("artifacts").items()) {
            ArtifactEntry e;
            e.path = a2.at("path").get<std::string>();
            e.digest = a2.at("digest").get<std::string>();
            e.command = a2.value("command", "");
            const Json inputs = a2.value("inputs", Json::object());
            for (const auto& [in, d] : inputs.items()) e.inputs[in] = d.get<std::string>();
            s.artifacts[name] = std::move(e);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("project file: {}", e.what()));
    } catch (const InvalidArgument& e) {
        throw ParseError(fmt::format("project file: {}", e.what()));
    }
}

// --- project directory ------------------------------------------------------------

Project Project::init(const fs::path& root, ProjectState state, bool force) {
    if (fs::exists(root / kProjectFile) && !force) {
        throw PreconditionError(
            fmt::format("{} already holds a project; pass --force to overwrite it", (root / kProjectFile).string()));
    }
    std::error_code ec;
    fs::create_directories(root / "artifacts", ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", (root / "artifacts").string(), ec.message()));
    Project p(root, std::move(state));
    p.save();
    return p;
}

Project Project::open(const fs::path& root) {
    auto file = root / kProjectFile;
    if (!fs::exists(file)) {
        throw PreconditionError(fmt::format("no project at {}; run `abspm init` first", root.string()));
    }
    Json j;
    try {
        j = Json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("{}: {}", file.string(), e.what()));
    }
    return Project(root, state_from_json(j));
}

void Project::save() const {
    write_file_atomic(root_ / kProjectFile, to_json(state_).dump(2) + "\n");
}

std::vector<std::string> Project::staleness_warnings() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : state_.artifacts) {
        auto path = root_ / e.path;
        if (!fs::exists(path)) {
            out.push_back(fmt::format("artifact {} is missing: {}", name, e.path));
            continue;
        }
        if (file_digest(path) != e.digest) {
            out.push_back(fmt::format("artifact {} changed on disk since it was registered: {}", name, e.path));
        }
        for (const auto& [input, digest] : e.inputs) {
            auto it = state_.artifacts.find(input);
            if (it == state_.artifacts.end() || it->second.digest != digest) {
                out.push_back(fmt::format("artifact {} is stale: input {} has changed; rerun `abspm {}`", name, input,
                                          e.command));
            }
        }
    }
    return out;
}

bool Project::has(std::string_view name) const {
    return state_.artifacts.contains(std::string(name));
}

const ArtifactEntry& Project::entry(std::string_view name) const {
    auto it = state_.artifacts.find(std::string(name));
    if (it == state_.artifacts.end()) {
        throw PreconditionError(
            fmt::format("missing artifact {}; run `abspm {}` first", name, producer_of(name)));
    }
    return it->second;
}

fs::path Project::require(std::string_view name) const {
    const auto& e = entry(name);
    auto path = root_ / e.path;
    if (!fs::exists(path)) {
        throw PreconditionError(fmt::format("artifact {} is registered but {} does not exist; rerun `abspm {}`", name,
                                            e.path, producer_of(name)));
    }
    return path;
}

std::string Project::artifact_name(std::string_view stem, std::string_view ext, std::string_view key_material) const {
    return fmt::format("artifacts/{}-{}.{}", stem, digest_hex(key_material).substr(0, 12), ext);
}

void Project::publish(std::string_view name, const std::string& relative_path, std::string_view content,
                      std::string_view command, const std::vector<std::string>& inputs) {
    auto path = root_ / relative_path;
    auto digest = digest_hex(content);
    // Names are keyed by inputs, so an existing file with the same name is
    // the same output; it is never rewritten with different bytes.
    if (!fs::exists(path) || file_digest(path) != digest) write_file_atomic(path, content);
    ArtifactEntry e;
    e.path = relative_path;
    e.digest = digest;
    e.command = std::string(command);
    for (const auto& in : inputs) e.inputs[in] = entry(in).digest;
    state_.artifacts[std::string(name)] = std::move(e);
}

void Project::drop(std::string_view name) {
    state_.artifacts.erase(std::string(name));
}

void Project::set_phase(Phase phase, PhaseState state, std::string note) {
    auto& p = state_.phases[phase];
    p.state = state;
    p.note = std::move(note);
}

assessment::JudgmentStore Project::load_judgments() const {
    if (!fs::exists(audit_path())) return {};
    return assessment::JudgmentStore::from_audit(read_file(audit_path()));
}

void Project::persist_judgments(const assessment::JudgmentStore& store,
                                std::span<const assessment::Judgment> added) const {
    fs::create_directories(audit_path().parent_path());
    std::ofstream out(audit_path(), std::ios::app | std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot append to {}", audit_path().string()));
    for (const auto& j : added) out << assessment::judgment_to_json(j) << '\n';
    out.flush();
    if (!out) throw IoError(fmt::format("write failed: {}", audit_path().string()));
    write_file_atomic(current_judgments_path(), store.current_json());
}

fs::path resolve_project_path(const fs::path& fallback) {
    if (const char* env = std::getenv(std::string(kProjectEnv).c_str()); env != nullptr && *env != '\0') return env;
    return fallback;
}

}  // namespace abspm::pipeline
