#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "abspm/error.hpp"
#include "abspm/io.hpp"
#include "abspm/pipeline.hpp"
#include "abspm/server.hpp"
#include "abspm/time.hpp"

namespace fs = std::filesystem;
using namespace abspm;
using namespace abspm::pipeline;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitPrecondition = 2;

struct SimFlags {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::optional<int> grid;
    std::optional<double> density;
    std::optional<int> max_steps;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--tolerance", f.tolerance, "Share of unlike neighbors an agent tolerates (0-1)");
    cmd->add_option("--grid", f.grid, "Grid side length (square grid)");
    cmd->add_option("--density", f.density, "Occupied share of cells (0-1]");
    cmd->add_option("--max-steps", f.max_steps, "Step limit");
}

void apply_sim_flags(ProjectState& s, const SimFlags& f) {
    if (f.seed) s.sim.seed = *f.seed;
    if (f.tolerance) s.sim.tolerance = *f.tolerance;
    if (f.grid) s.sim.grid_width = s.sim.grid_height = *f.grid;
    if (f.density) s.sim.density = *f.density;
    if (f.max_steps) s.sim.max_steps = *f.max_steps;
    s.sim.validate();
}

// Commands downstream of simulate accept --seed only to confirm it.
void check_seed(const Project& project, const std::optional<std::uint64_t>& seed) {
    if (seed && *seed != project.state().sim.seed) {
        throw PreconditionError(fmt::format("project seed is {}; run `abspm simulate --seed {}` first",
                                            project.state().sim.seed, *seed));
    }
}

Date date_flag(const std::string& text, const char* flag) {
    auto d = parse_date(text);
    if (!d) throw InvalidArgument(fmt::format("{}: '{}' is not a date (YYYY-MM-DD or DD.MM.YYYY)", flag, text));
    return *d;
}

double percent_flag(double value, const char* flag) {
    if (!(value > 0.0 && value <= 100.0)) throw InvalidArgument(fmt::format("{} must be in (0, 100]", flag));
    return value / 100.0;
}

Project open_project(const fs::path& root) {
    auto project = Project::open(root);
    for (const auto& w : project.staleness_warnings()) std::cerr << "warning: " << w << "\n";
    return project;
}

void print_stats(const eventlog::LogStats& st) {
    std::cout << fmt::format("cases {}\nevents {}\nactivities {}\nevents per case min {} median {:g} max {}\n", st.cases,
                             st.events, st.activities, st.min_events_per_case, st.median_events_per_case,
                             st.max_events_per_case);
    if (st.first_timestamp) {
        std::cout << fmt::format("timeframe {} .. {}\n", format_iso_timestamp(*st.first_timestamp),
                                 format_iso_timestamp(*st.last_timestamp));
    }
    if (st.duplicate_timestamp_cases > 0) {
        std::cout << fmt::format("cases with unordered duplicate timestamps {}\n", st.duplicate_timestamp_cases);
    }
    if (st.label_violations > 0) std::cout << fmt::format("label violations {}\n", st.label_violations);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Process-mining based face-validity assessment of a Schelling simulation", "abspm"};
    app.require_subcommand(1);
    std::string project_flag;
    app.add_option("--project,-C", project_flag, "Project directory (default: $ABSPM_PROJECT, then .)");

    std::optional<std::uint64_t> seed;
    auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", seed, "Simulation seed"); };

    SimFlags sim_flags;
    bool force = false;
    auto* init = app.add_subcommand("init", "Create a project with the default configuration");
    add_seed(init);
    add_sim_flags(init, sim_flags);
    init->add_flag("--force", force, "Overwrite an existing project file");

    auto* simulate_cmd = app.add_subcommand("simulate", "Run the simulation and write the raw log");
    add_seed(simulate_cmd);
    add_sim_flags(simulate_cmd, sim_flags);

    auto* convert_cmd = app.add_subcommand("convert", "Convert the raw log into XES and CSV event logs");
    add_seed(convert_cmd);

    auto* stats_cmd = app.add_subcommand("stats", "Print and record event log statistics");
    add_seed(stats_cmd);

    std::optional<std::string> preset, from, to;
    std::optional<double> max_duration;
    std::optional<std::size_t> max_events;
    auto* filter_cmd = app.add_subcommand("filter", "Apply whole-case filters to the event log");
    add_seed(filter_cmd);
    filter_cmd->add_option("--preset", preset, "Filter preset (paper-outlier, none, custom)");
    filter_cmd->add_option("--from", from, "Keep cases active on or after this date");
    filter_cmd->add_option("--to", to, "Keep cases active on or before this date");
    filter_cmd->add_option("--max-duration-days", max_duration, "Keep cases shorter than this many days");
    filter_cmd->add_option("--max-events", max_events, "Keep cases with at most this many events");

    std::optional<double> activities, paths, cutoff;
    std::optional<std::string> metric, secondary, mode;
    auto* discover_cmd = app.add_subcommand("discover", "Discover the directly-follows model");
    add_seed(discover_cmd);
    discover_cmd->add_option("--activities", activities, "Percentage of activities shown (0-100]");
    discover_cmd->add_option("--paths", paths, "Percentage of paths shown [0-100]");
    discover_cmd->add_option("--metric", metric, "Primary indicator");
    discover_cmd->add_option("--secondary", secondary, "Secondary indicator");
    discover_cmd->add_option("--mode", mode, "Abstraction mode (frequency_rank, fuzzy)");
    discover_cmd->add_option("--cutoff", cutoff, "Fuzzy mode utility cutoff [0-1]");

    std::string verdicts;
    bool interactive = false;
    std::optional<std::string> assessor;
    auto* assess_cmd = app.add_subcommand("assess", "Record expert verdicts and write the assessment report");
    add_seed(assess_cmd);
    auto* verdict_opt = assess_cmd->add_option("--verdicts", verdicts, "Verdict CSV (obs_id,q1,q2[,note])");
    auto* interactive_opt = assess_cmd->add_flag("--interactive", interactive, "Prompt for each verdict");
    verdict_opt->excludes(interactive_opt);
    assess_cmd->add_option("--assessor", assessor, "Assessor identifier");

    auto* report_cmd = app.add_subcommand("report", "Assemble the final report");
    add_seed(report_cmd);

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string ui_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API and the explorer UI");
    add_seed(serve_cmd);
    serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--ui", ui_dir, "Static UI directory (default: <project>/ui)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitPrecondition;
    }

    const fs::path root = project_flag.empty() ? resolve_project_path(".") : fs::path(project_flag);
    sim_flags.seed = seed;

    try {
        if (init->parsed()) {
            auto state = default_state(seed.value_or(42));
            apply_sim_flags(state, sim_flags);
            // the outlier preset is anchored at the base date
            state.filter_presets[std::string(kOutlierPreset)] = eventlog::outlier_preset(state.sim.base_date);
            auto project = Project::init(root, std::move(state), force);
            std::cout << fmt::format("initialized {}\n", (project.root() / kProjectFile).string());
            return kExitOk;
        }

        auto project = open_project(root);
        auto& s = project.state();

        if (simulate_cmd->parsed()) {
            apply_sim_flags(s, sim_flags);
            auto out = simulate(project);
            std::cout << fmt::format("{} agents, {} steps, {}, {} records\n{}\n", out.agents, out.steps,
                                     out.converged ? "converged" : "step limit reached", out.records, out.raw_path);
            return kExitOk;
        }

        check_seed(project, seed);

        if (convert_cmd->parsed()) {
            auto out = convert(project);
            std::cout << fmt::format("{} cases, {} events\n{}\n{}\n", out.cases, out.events, out.xes_path, out.csv_path);
        } else if (stats_cmd->parsed()) {
            print_stats(stats(project));
        } else if (filter_cmd->parsed()) {
            if (preset) {
                if (!s.filter_presets.contains(*preset)) {
                    throw InvalidArgument(fmt::format("unknown filter preset '{}'", *preset));
                }
                s.active_preset = *preset;
            }
            if (from || to || max_duration || max_events) {
                auto spec = s.active_filter();
                if (from) spec.from = date_flag(*from, "--from");
                if (to) spec.to = date_flag(*to, "--to");
                if (max_duration) spec.max_case_duration_days = *max_duration;
                if (max_events) spec.max_events_per_case = *max_events;
                spec.validate();
                s.filter_presets["custom"] = spec;
                s.active_preset = "custom";
            }
            auto out = filter(project);
            std::cout << fmt::format("preset {}: kept {} of {} cases, {} of {} events\n{}\n", s.active_preset,
                                     out.after.cases, out.before.cases, out.after.events, out.before.events,
                                     out.xes_path);
            if (out.after.cases == 0) std::cerr << "warning: the filtered log is empty\n";
        } else if (discover_cmd->parsed()) {
            if (activities) s.abstraction.activity_ratio = percent_flag(*activities, "--activities");
            if (paths) {
                if (!(*paths >= 0.0 && *paths <= 100.0)) throw InvalidArgument("--paths must be in [0, 100]");
                s.abstraction.path_ratio = *paths / 100.0;
            }
            if (mode) s.abstraction.mode = discovery::parse_mode(*mode);
            if (cutoff) s.abstraction.cutoff = *cutoff;
            if (metric) s.primary = discovery::parse_indicator(*metric);
            if (secondary) s.secondary = discovery::parse_indicator(*secondary);
            s.abstraction.validate();
            auto out = discover(project);
            std::cout << fmt::format("{} activities, {} paths\n{}\n{}\n", out.nodes, out.edges, out.dot_path,
                                     out.json_path);
        } else if (assess_cmd->parsed()) {
            if (assessor) {
                if (assessor->empty()) throw InvalidArgument("--assessor must not be empty");
                s.assessment.assessor = *assessor;
            }
            std::vector<assessment::Judgment> judgments;
            auto stamp = now_timestamp();
            if (!verdicts.empty()) {
                if (!fs::is_regular_file(verdicts)) {
                    throw PreconditionError(fmt::format("verdict file {} does not exist", verdicts));
                }
                judgments = assessment::parse_verdict_csv(read_file(verdicts), s.assessment.assessor, stamp);
            } else if (interactive) {
                auto obs = prepare_observations(project);
                judgments =
                    assessment::run_interactive(obs, s.population(), s.assessment.assessor, stamp, std::cin, std::cout);
            }
            auto out = assess(project, judgments);
            if (out.observations == 0) std::cerr << "warning: no observations; the report has zero rows\n";
            std::cout << fmt::format("{} observations, {} verdicts recorded, {} pending\n{}\n", out.observations,
                                     out.recorded, out.report.pending.size(), out.markdown_path);
        } else if (report_cmd->parsed()) {
            auto out = report(project);
            for (const auto& m : out.missing) std::cerr << "warning: missing artifact " << m << "\n";
            std::cout << out.path << "\n";
        } else if (serve_cmd->parsed()) {
            fs::path ui = ui_dir.empty() ? project.root() / "ui" : fs::path(ui_dir);
            ApiService service(std::move(project));
            HttpServer server(service, ui);
            int bound = server.bind(host, port);
            std::cout << fmt::format("serving on http://{}:{}/\n", host, bound) << std::flush;
            server.run();
        }
        return kExitOk;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
