#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "abspm/error.hpp"
#include "abspm/time.hpp"

namespace abspm::sim {

struct Location {
    int x = 0;
    int y = 0;
    friend bool operator==(const Location&, const Location&) = default;
};

using AgentId = std::uint32_t;

enum class Status { happy, unhappy };

struct SimConfig {
    int grid_width = 20;
    int grid_height = 20;
    double density = 0.70;
    double tolerance = 0.55;
    int group_count = 2;
    int max_steps = 100;
    std::uint64_t seed = 0;
    bool emit_initial_status = true;
    Date base_date{std::chrono::year{2023}, std::chrono::October, std::chrono::day{17}};

    /// floor(density * cells).
    int agent_count() const;

    /// Throws InvalidArgument on any range violation.
    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Agent {
    AgentId id = 0;
    int group = 0;
    Location location;
    Status status = Status::happy;
};

enum class RecordKind { move, status };

struct RawEventRecord {
    std::uint64_t event_no = 0;
    int step = 0;
    int step_counter = 0;
    AgentId agent_id = 0;
    RecordKind kind = RecordKind::status;
    std::optional<Location> prev_loc;
    Location new_loc;
    std::vector<AgentId> neighbor_ids;
    int similar_count = 0;
    bool happy = true;

    friend bool operator==(const RawEventRecord&, const RawEventRecord&) = default;
};

struct SimResult {
    std::vector<RawEventRecord> records;
    std::vector<Agent> final_grid;
    int steps_executed = 0;
    bool converged = false;
};

class SimulationFault : public Error {
public:
    using Error::Error;
};

/// Status rule: an agent with no neighbors is happy; otherwise it is unhappy
/// when the share of dissimilar neighbors strictly exceeds the tolerance.
Status classify(int neighbor_count, int similar_count, double tolerance);

/// Seeded Schelling grid. Movers relocate sequentially in ascending id order
/// to a uniformly drawn empty cell; statuses are recomputed once all moves of
/// a step are done.
class Simulation {
public:
    /// Random placement from the config's seed.
    explicit Simulation(const SimConfig& config);

    /// Explicit placement; ids must be unique and positive, locations
    /// distinct and in bounds, groups below group_count. The RNG is still
    /// seeded from config.seed and drives movement only.
    static Simulation from_agents(const SimConfig& config, std::vector<Agent> agents);

    const SimConfig& config() const { return config_; }
    std::span<const Agent> agents() const { return agents_; }
    int steps_executed() const { return step_; }

    /// Records produced during construction (initial status records).
    std::vector<RawEventRecord> take_initial_records();

    bool all_happy() const;

    /// Executes one step and returns the records it emitted. Throws
    /// SimulationFault when a mover finds no empty cell.
    std::vector<RawEventRecord> run_step();

    SimResult finish(std::vector<RawEventRecord> records, bool converged) const;

private:
    Simulation(const SimConfig& config, std::vector<Agent> agents, bool explicit_placement);

    struct Census {
        std::vector<AgentId> neighbors;
        int similar = 0;
    };

    Census census_at(Location loc, int group, AgentId self) const;
    int cell_index(Location loc) const { return loc.y * config_.grid_width + loc.x; }
    Location cell_location(int index) const;
    RawEventRecord make_record(const Agent& agent, RecordKind kind, std::optional<Location> prev,
                               int step_counter);

    SimConfig config_;
    std::mt19937_64 rng_;
    std::vector<Agent> agents_;  // sorted by id
    std::vector<int> grid_;      // cell -> agent index, -1 when empty
    std::vector<RawEventRecord> initial_;
    std::uint64_t next_event_no_ = 1;
    int step_ = 0;
};

/// Runs until every agent is happy at the start of a step or max_steps
/// steps have been executed.
SimResult run(const SimConfig& config);

/// Same loop over an already constructed simulation.
SimResult run(Simulation& simulation);

/// Draws an index in [0, n) from the generator by rejection sampling on the
/// raw 64-bit output. Fixed so that seeded runs are reproducible across
/// standard library implementations.
std::uint64_t draw_index(std::mt19937_64& rng, std::uint64_t n);

// Raw CSV: EventNo,Step,StepCounter,AgentID,Kind,PrevLoc,NewLoc,Neighbors,Similar,Happy
std::string raw_csv_header();
std::string format_raw_row(const RawEventRecord& record);
std::string to_raw_csv(std::span<const RawEventRecord> records);
std::vector<RawEventRecord> parse_raw_csv(std::string_view text);
void write_raw_csv(const SimResult& result, const std::filesystem::path& path);
std::vector<RawEventRecord> read_raw_csv(const std::filesystem::path& path);

std::string format_location(Location loc);   // "(30, 17)"
std::string format_neighbors(std::span<const AgentId> ids);  // "[1, 2]"

}  // namespace abspm::sim
