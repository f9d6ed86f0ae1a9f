// Exercises the installed command-line interface end to end, including its
// exit-code contract: 0 success, 2 bad input, 4 impossible outcome.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#ifndef SPINRING_CLI_PATH
#error "SPINRING_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "spinring_cli_out.txt";
    const std::string cmd = std::string(SPINRING_CLI_PATH) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult res;
    res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    return res;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("spinring_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("gs prints converged energies") {
    auto res = run_cli("gs --n 8");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("E0=-3.651093") != std::string::npos);

    // odd ring sizes are rejected
    CHECK(run_cli("gs --n 7").exit_code == 2);
}

TEST_CASE("gs saves a state that evolve can round-trip") {
    auto dir = fresh_dir("evolve");
    const std::string state = (dir / "gs.state").string();
    const std::string out = (dir / "evolved.state").string();

    CHECK(run_cli("gs --n 6 --save " + state).exit_code == 0);
    auto res = run_cli("evolve --in " + state + " --t 2.0 --dt 0.5 --out " + out);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("norm 1.000000000000") != std::string::npos);
    CHECK(fs::exists(out));

    CHECK(run_cli("evolve --in " + (dir / "missing.state").string() + " --t 1 --out " + out)
              .exit_code == 2);
}

TEST_CASE("scenario validate distinguishes good and bad files") {
    CHECK(run_cli("scenario validate fig3_n10").exit_code == 0);

    auto dir = fresh_dir("validate");
    const fs::path bad = dir / "bad.json";
    write_text(bad, R"({"schema": "spinring-scenario-1",
                        "chain": {"n_sites": 7},
                        "initial_state": {"type": "ground_state"},
                        "grid": {"t_end": 1.0},
                        "observables": [{"type": "energy"}],
                        "output_prefix": "bad"})");
    auto res = run_cli("scenario validate " + bad.string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("violation") != std::string::npos);
}

TEST_CASE("scenario run writes tables and a manifest") {
    auto dir = fresh_dir("run");
    const fs::path file = dir / "tiny.json";
    write_text(file, R"({"schema": "spinring-scenario-1",
                         "chain": {"n_sites": 6},
                         "initial_state": {"type": "ground_state"},
                         "events": [{"t": 0.2, "site": 1, "axis": "z", "sign": "+"}],
                         "grid": {"t_start": 0.0, "t_end": 0.5, "dt": 0.1},
                         "observables": [{"type": "magnetization", "axis": "z", "sites": "all"}],
                         "output_prefix": "tiny"})");
    auto res = run_cli("scenario run " + file.string() + " --out-dir " + dir.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("event 0") != std::string::npos);
    CHECK(fs::exists(dir / "tiny_series.csv"));
    CHECK(fs::exists(dir / "tiny_manifest.json"));

    // asking for an outcome of zero probability reports exit code 4
    const fs::path dead = dir / "dead.json";
    write_text(dead, R"({"schema": "spinring-scenario-1",
                         "chain": {"n_sites": 6},
                         "initial_state": {"type": "product", "pattern": "uuuuuu"},
                         "events": [{"t": 0.2, "site": 1, "axis": "z", "sign": "-"}],
                         "grid": {"t_start": 0.0, "t_end": 0.5, "dt": 0.1},
                         "observables": [{"type": "energy"}],
                         "output_prefix": "dead"})");
    auto dead_res = run_cli("scenario run " + dead.string() + " --out-dir " + dir.string());
    CHECK(dead_res.exit_code == 4);
    CHECK(dead_res.output.find("error:") != std::string::npos);
}

TEST_CASE("spectrum reports the dominant frequency of a series") {
    auto dir = fresh_dir("spectrum");
    const fs::path series = dir / "series.csv";
    std::ofstream out(series);
    out << "t,site,axis,value\n";
    for (int k = 0; k < 400; ++k) {
        const double t = 0.1 * k;
        char line[96];
        std::snprintf(line, sizeof line, "%.17g,1,z,%.17g\n", t, std::cos(1.5 * t));
        out << line;
    }
    out.close();

    auto res = run_cli("spectrum " + series.string() + " --site 1 --axis z --out " +
                       (dir / "spec.csv").string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("dominant angular frequency 1.5") != std::string::npos);
    CHECK(fs::exists(dir / "spec.csv"));

    CHECK(run_cli("spectrum " + series.string() + " --site 3").exit_code == 2);
}

TEST_CASE("presets are listed and dumped") {
    auto list = run_cli("presets list");
    CHECK(list.exit_code == 0);
    CHECK(list.output.find("fig3_n10") != std::string::npos);
    CHECK(list.output.find("fig5_n20_d2") != std::string::npos);

    auto dump = run_cli("presets dump fig3_n10");
    CHECK(dump.exit_code == 0);
    auto doc = nlohmann::json::parse(dump.output);
    CHECK(doc["chain"]["n_sites"] == 10);

    CHECK(run_cli("presets dump not_a_preset").exit_code == 2);
}

TEST_CASE("usage errors exit with code 2 and help with 0") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("gs").exit_code == 2);  // --n is required
}
