#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "abspm/error.hpp"
#include "abspm/sim.hpp"

namespace abspm::sim {

int SimConfig::agent_count() const {
    // The small epsilon keeps 0.7 * 400 from flooring to 279.
    double cells = static_cast<double>(grid_width) * static_cast<double>(grid_height);
    return static_cast<int>(std::floor(density * cells + 1e-9));
}

void SimConfig::validate() const {
    if (grid_width <= 0 || grid_height <= 0) {
        throw InvalidArgument(fmt::format("grid must be positive, got {}x{}", grid_width, grid_height));
    }
    if (!(density > 0.0 && density <= 1.0)) {
        throw InvalidArgument(fmt::format("density must lie in (0, 1], got {}", density));
    }
    if (!(tolerance >= 0.0 && tolerance <= 1.0)) {
        throw InvalidArgument(fmt::format("tolerance must lie in [0, 1], got {}", tolerance));
    }
    if (group_count < 2) {
        throw InvalidArgument(fmt::format("group_count must be at least 2, got {}", group_count));
    }
    if (max_steps <= 0) {
        throw InvalidArgument(fmt::format("max_steps must be positive, got {}", max_steps));
    }
    if (!base_date.ok()) throw InvalidArgument("base_date is not a valid calendar date");
    int n = agent_count();
    if (n <= 0) throw InvalidArgument("density yields zero agents");
    if (n > grid_width * grid_height) throw InvalidArgument("agent count exceeds cell count");
    if (n < group_count) {
        throw InvalidArgument(
            fmt::format("{} agents cannot populate {} groups", n, group_count));
    }
}

Status classify(int neighbor_count, int similar_count, double tolerance) {
    if (neighbor_count <= 0) return Status::happy;
    double dissimilar = static_cast<double>(neighbor_count - similar_count) / neighbor_count;
    return dissimilar > tolerance ? Status::unhappy : Status::happy;
}

std::uint64_t draw_index(std::mt19937_64& rng, std::uint64_t n) {
    // Reject the low sliver that would bias the modulo.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

namespace {

std::vector<Agent> random_agents(const SimConfig& config, std::mt19937_64& rng) {
    const int cells = config.grid_width * config.grid_height;
    const int n = config.agent_count();

    std::vector<int> order(static_cast<std::size_t>(cells));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < n; ++i) {
        auto j = i + static_cast<int>(draw_index(rng, static_cast<std::uint64_t>(cells - i)));
        std::swap(order[i], order[j]);
    }

    std::vector<int> groups(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) groups[i] = i % config.group_count;
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(draw_index(rng, static_cast<std::uint64_t>(i + 1)));
        std::swap(groups[i], groups[j]);
    }

    std::vector<Agent> agents(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        agents[i].id = static_cast<AgentId>(i + 1);
        agents[i].group = groups[i];
        agents[i].location = {order[i] % config.grid_width, order[i] / config.grid_width};
    }
    return agents;
}

}  // namespace

Simulation::Simulation(const SimConfig& config) : Simulation(config, {}, false) {}

Simulation Simulation::from_agents(const SimConfig& config, std::vector<Agent> agents) {
    return Simulation(config, std::move(agents), true);
}

Simulation::Simulation(const SimConfig& config, std::vector<Agent> agents, bool explicit_placement)
    : config_(config), agents_(std::move(agents)) {
    rng_.seed(config_.seed);
    if (explicit_placement) {
        if (config_.grid_width <= 0 || config_.grid_height <= 0) throw InvalidArgument("grid must be positive");
        if (!(config_.tolerance >= 0.0 && config_.tolerance <= 1.0)) {
            throw InvalidArgument("tolerance must lie in [0, 1]");
        }
        if (agents_.empty()) throw InvalidArgument("at least one agent is required");
    } else {
        config_.validate();
        agents_ = random_agents(config_, rng_);
    }
    std::sort(agents_.begin(), agents_.end(), [](const Agent& a, const Agent& b) { return a.id < b.id; });

    grid_.assign(static_cast<std::size_t>(config_.grid_width * config_.grid_height), -1);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const Agent& a = agents_[i];
        if (a.id == 0) throw InvalidArgument("agent ids must be positive");
        if (i > 0 && agents_[i - 1].id == a.id) throw InvalidArgument(fmt::format("duplicate agent id {}", a.id));
        if (a.group < 0 || a.group >= config_.group_count) {
            throw InvalidArgument(fmt::format("agent {} has group {} outside [0, {})", a.id, a.group, config_.group_count));
        }
        if (a.location.x < 0 || a.location.y < 0 || a.location.x >= config_.grid_width ||
            a.location.y >= config_.grid_height) {
            throw InvalidArgument(fmt::format("agent {} is out of bounds at {}", a.id, format_location(a.location)));
        }
        int& cell = grid_[static_cast<std::size_t>(cell_index(a.location))];
        if (cell != -1) throw InvalidArgument(fmt::format("two agents share {}", format_location(a.location)));
        cell = static_cast<int>(i);
    }

    int counter = 0;
    for (Agent& a : agents_) {
        Census c = census_at(a.location, a.group, a.id);
        a.status = classify(static_cast<int>(c.neighbors.size()), c.similar, config_.tolerance);
    }
    if (config_.emit_initial_status) {
        for (const Agent& a : agents_) {
            initial_.push_back(make_record(a, RecordKind::status, std::nullopt, ++counter));
        }
    }
}

Location Simulation::cell_location(int index) const {
    return {index % config_.grid_width, index / config_.grid_width};
}

Simulation::Census Simulation::census_at(Location loc, int group, AgentId self) const {
    Census c;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            Location n{loc.x + dx, loc.y + dy};
            if (n.x < 0 || n.y < 0 || n.x >= config_.grid_width || n.y >= config_.grid_height) continue;
            int occupant = grid_[static_cast<std::size_t>(cell_index(n))];
            if (occupant < 0) continue;
            const Agent& other = agents_[static_cast<std::size_t>(occupant)];
            if (other.id == self) continue;
            c.neighbors.push_back(other.id);
            if (other.group == group) ++c.similar;
        }
    }
    return c;
}

RawEventRecord Simulation::make_record(const Agent& agent, RecordKind kind, std::optional<Location> prev,
                                       int step_counter) {
    Census c = census_at(agent.location, agent.group, agent.id);
    RawEventRecord r;
    r.event_no = next_event_no_++;
    r.step = step_;
    r.step_counter = step_counter;
    r.agent_id = agent.id;
    r.kind = kind;
    r.prev_loc = prev;
    r.new_loc = agent.location;
    r.similar_count = c.similar;
    r.happy = classify(static_cast<int>(c.neighbors.size()), c.similar, config_.tolerance) == Status::happy;
    r.neighbor_ids = std::move(c.neighbors);
    return r;
}

std::vector<RawEventRecord> Simulation::take_initial_records() {
    return std::exchange(initial_, {});
}

bool Simulation::all_happy() const {
    return std::all_of(agents_.begin(), agents_.end(), [](const Agent& a) { return a.status == Status::happy; });
}

std::vector<RawEventRecord> Simulation::run_step() {
    ++step_;
    std::vector<RawEventRecord> out;
    int counter = 0;

    std::vector<std::size_t> movers;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (agents_[i].status == Status::unhappy) movers.push_back(i);
    }

    // Ordered set of empty cells; vacated cells become eligible immediately.
    std::set<int> empty;
    for (int c = 0; c < static_cast<int>(grid_.size()); ++c) {
        if (grid_[static_cast<std::size_t>(c)] < 0) empty.insert(c);
    }

    for (std::size_t idx : movers) {
        Agent& a = agents_[idx];
        if (empty.empty()) {
            throw SimulationFault(fmt::format("step {}: agent {} is unhappy but the grid has no empty cell", step_, a.id));
        }
        auto pick = draw_index(rng_, empty.size());
        auto it = std::next(empty.begin(), static_cast<std::ptrdiff_t>(pick));
        int target = *it;
        empty.erase(it);
        int source = cell_index(a.location);
        empty.insert(source);
        grid_[static_cast<std::size_t>(source)] = -1;
        grid_[static_cast<std::size_t>(target)] = static_cast<int>(idx);
        Location prev = a.location;
        a.location = cell_location(target);
        out.push_back(make_record(a, RecordKind::move, prev, ++counter));
    }

    std::vector<Status> next(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        Census c = census_at(agents_[i].location, agents_[i].group, agents_[i].id);
        next[i] = classify(static_cast<int>(c.neighbors.size()), c.similar, config_.tolerance);
    }
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (next[i] == agents_[i].status) continue;
        agents_[i].status = next[i];
        out.push_back(make_record(agents_[i], RecordKind::status, std::nullopt, ++counter));
    }
    return out;
}

SimResult Simulation::finish(std::vector<RawEventRecord> records, bool converged) const {
    SimResult result;
    result.records = std::move(records);
    result.final_grid = agents_;
    result.steps_executed = step_;
    result.converged = converged;
    return result;
}

SimResult run(Simulation& simulation) {
    std::vector<RawEventRecord> records = simulation.take_initial_records();
    bool converged = false;
    for (;;) {
        if (simulation.all_happy()) {
            converged = true;
            break;
        }
        if (simulation.steps_executed() >= simulation.config().max_steps) break;
        auto step_records = simulation.run_step();
        records.insert(records.end(), std::make_move_iterator(step_records.begin()),
                       std::make_move_iterator(step_records.end()));
    }
    return simulation.finish(std::move(records), converged);
}

SimResult run(const SimConfig& config) {
    Simulation simulation(config);
    return run(simulation);
}

}  // namespace abspm::sim
