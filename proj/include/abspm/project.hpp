#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abspm/assessment.hpp"
#include "abspm/dfg.hpp"
#include "abspm/eventlog.hpp"
#include "abspm/sim.hpp"

namespace abspm::pipeline {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kProjectFile = "abspm.json";
inline constexpr std::string_view kProjectEnv = "ABSPM_PROJECT";
inline constexpr std::string_view kOutlierPreset = "paper-outlier";
inline constexpr std::string_view kNoFilterPreset = "none";

enum class Phase { contextual_understanding, data_understanding, data_preparation, modeling, evaluation, deployment };
enum class PhaseState { pending, in_progress, done };

inline constexpr Phase kPhases[] = {Phase::contextual_understanding, Phase::data_understanding,
                                    Phase::data_preparation,         Phase::modeling,
                                    Phase::evaluation,               Phase::deployment};

std::string_view phase_name(Phase phase);
std::string_view phase_title(Phase phase);  // "Contextual understanding"
Phase parse_phase(std::string_view name);
std::string_view phase_state_name(PhaseState state);
PhaseState parse_phase_state(std::string_view name);

struct ChecklistItem {
    std::string item;
    bool done = false;
    friend bool operator==(const ChecklistItem&, const ChecklistItem&) = default;
};

struct PhaseStatus {
    PhaseState state = PhaseState::pending;
    std::string note;
    std::vector<ChecklistItem> checklist;
    friend bool operator==(const PhaseStatus&, const PhaseStatus&) = default;
};

struct AssessmentSettings {
    std::string assessor = "expert";
    /// Q2 population; derived from the simulation config when unset.
    std::optional<std::size_t> population;
    std::vector<assessment::ObservationRequest> requests = assessment::default_requests();
    friend bool operator==(const AssessmentSettings&, const AssessmentSettings&) = default;
};

struct ArtifactEntry {
    std::string path;  // relative to the project root
    std::string digest;
    std::string command;
    std::map<std::string, std::string> inputs;  // artifact name -> digest at production time
    friend bool operator==(const ArtifactEntry&, const ArtifactEntry&) = default;
};

struct ProjectState {
    sim::SimConfig sim;  // carries the project seed
    std::map<std::string, eventlog::FilterSpec> filter_presets;
    std::string active_preset = std::string(kOutlierPreset);
    discovery::AbstractionSpec abstraction;
    discovery::Indicator primary = discovery::Indicator::case_frequency;
    discovery::Indicator secondary = discovery::Indicator::max_repetitions;
    AssessmentSettings assessment;
    std::map<Phase, PhaseStatus> phases;
    std::map<std::string, ArtifactEntry> artifacts;

    /// Throws InvalidArgument when the active preset is not defined.
    const eventlog::FilterSpec& active_filter() const;
    std::size_t population() const;

    friend bool operator==(const ProjectState&, const ProjectState&) = default;
};

/// Defaults: 20x20 grid, density 0.70, tolerance 0.55, 100 steps,
/// presets `paper-outlier` (active) and `none`.
ProjectState default_state(std::uint64_t seed = 42);

Json to_json(const eventlog::FilterSpec& spec);
eventlog::FilterSpec filter_from_json(const Json& j);
Json to_json(const sim::SimConfig& config);
Json to_json(const eventlog::LogStats& stats);
Json to_json(const ProjectState& state);
ProjectState state_from_json(const Json& j);

/// A project directory holding abspm.json, artifacts/ and judgments/.
class Project {
public:
    /// Refuses an existing project unless `force`.
    static Project init(const std::filesystem::path& root, ProjectState state, bool force);
    /// Throws PreconditionError when no project file exists.
    static Project open(const std::filesystem::path& root);

    const std::filesystem::path& root() const { return root_; }
    ProjectState& state() { return state_; }
    const ProjectState& state() const { return state_; }
    void save() const;

    /// Registered artifacts whose file is missing, whose digest changed, or
    /// whose recorded inputs no longer match the registry.
    std::vector<std::string> staleness_warnings() const;

    bool has(std::string_view name) const;
    const ArtifactEntry& entry(std::string_view name) const;
    /// Absolute path of a registered artifact. PreconditionError names the
    /// command that produces it when absent.
    std::filesystem::path require(std::string_view name) const;

    /// `artifacts/<stem>-<key>.<ext>` where key digests the command and its inputs.
    std::string artifact_name(std::string_view stem, std::string_view ext, std::string_view key_material) const;
    /// Writes content (unless the file already holds exactly it) and registers it.
    void publish(std::string_view name, const std::string& relative_path, std::string_view content,
                 std::string_view command, const std::vector<std::string>& inputs);
    void drop(std::string_view name);

    void set_phase(Phase phase, PhaseState state, std::string note);

    std::filesystem::path audit_path() const { return root_ / "judgments" / "audit.ndjson"; }
    std::filesystem::path current_judgments_path() const { return root_ / "judgments" / "current.json"; }
    assessment::JudgmentStore load_judgments() const;
    /// Appends to the audit trail and rewrites the compacted current state.
    void persist_judgments(const assessment::JudgmentStore& store, std::span<const assessment::Judgment> added) const;

private:
    Project(std::filesystem::path root, ProjectState state) : root_(std::move(root)), state_(std::move(state)) {}

    std::filesystem::path root_;
    ProjectState state_;
};

/// ABSPM_PROJECT when set, otherwise `fallback`.
std::filesystem::path resolve_project_path(const std::filesystem::path& fallback);

}  // namespace abspm::pipeline
