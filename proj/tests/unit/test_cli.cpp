#include "doctest.h"

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include <fmt/format.h>

#include "abspm/io.hpp"
#include "abspm/project.hpp"
#include "support/temp_dir.hpp"

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run run_cli(const std::string& args, const std::string& env = {}) {
    auto cmd = fmt::format("{} {} {} 2>&1", env, ABSPM_CLI, args);
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("command line pipeline and exit codes") {
    testsupport::TempDir dir;
    auto p = fmt::format("--project {}", dir.path().string());

    CHECK(run_cli(p + " init").code == 0);
    auto again = run_cli(p + " init");
    CHECK(again.code == 2);
    CHECK(again.out.find("--force") != std::string::npos);
    CHECK(run_cli(p + " init --force --seed 42").code == 0);

    auto early = run_cli(p + " convert");
    CHECK(early.code == 2);
    CHECK(early.out.find("raw_log") != std::string::npos);

    CHECK(run_cli(p + " simulate --seed 42").code == 0);
    CHECK(run_cli(p + " convert").code == 0);
    auto st = run_cli(p + " stats");
    CHECK(st.code == 0);
    CHECK(st.out.find("cases 280") != std::string::npos);

    CHECK(run_cli(p + " filter --from 2023-10-24 --max-duration-days 90 --max-events 25").code == 0);
    CHECK(run_cli(p + " discover --activities 100 --paths 100 --metric case_frequency --secondary max_repetitions").code == 0);
    CHECK(run_cli(fmt::format("{} assess --verdicts {}/reference_verdicts.csv", p, ABSPM_TEST_DATA_DIR)).code == 0);
    CHECK(run_cli(p + " report").code == 0);

    auto project = abspm::pipeline::Project::open(dir.path());
    CHECK(project.state().active_preset == "custom");
    CHECK(project.state().filter_presets.at("custom") == project.state().filter_presets.at("paper-outlier"));
    CHECK(project.has("report"));

    CHECK(run_cli(p + " discover --metric nope").code == 2);
    CHECK(run_cli(p + " discover --activities 0").code == 2);
    CHECK(run_cli(p + " filter --from notadate").code == 2);
    CHECK(run_cli(p + " simulate --density 1.5").code == 2);
    CHECK(run_cli(p + " stats --seed 7").code == 2);
    CHECK(run_cli(p + " assess --verdicts /definitely/not/here.csv").code == 2);
    CHECK(run_cli(p + " frobnicate").code == 2);
    CHECK(run_cli(p + " serve --port 70000").code == 2);
}

TEST_CASE("ABSPM_PROJECT selects the project directory") {
    testsupport::TempDir dir;
    auto env = fmt::format("ABSPM_PROJECT={}", dir.path().string());
    CHECK(run_cli("init --seed 5", env).code == 0);
    CHECK(std::filesystem::exists(dir.path() / "abspm.json"));
    CHECK(run_cli("simulate --grid 10 --density 0.5 --tolerance 0.3 --max-steps 20", env).code == 0);
    auto s = abspm::pipeline::Project::open(dir.path()).state();
    CHECK(s.sim.seed == 5);
    CHECK(s.sim.grid_width == 10);
    CHECK(s.sim.agent_count() == 50);
    CHECK(s.sim.tolerance == 0.3);
    CHECK(s.sim.max_steps == 20);
}
