#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = QRDYN_TEST_SCRATCH;

fs::path write_file(const std::string& name, const std::string& body) {
    fs::create_directories(kScratch);
    const auto p = kScratch / name;
    std::ofstream(p) << body;
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + QRDYN_CLI_PATH + "\" " + args + " > \"" +
                            (kScratch / "last.log").string() + "\" 2>&1";
    fs::create_directories(kScratch);
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string log_text() {
    std::ifstream in(kScratch / "last.log");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

const std::string kSmall = "environment: {N: 20}\ndrive: {tau: 2}\nnumerics: {n_samples: 60}\n";

} // namespace

TEST_CASE("trajectory writes CSV, metadata and plots") {
    const auto cfg = write_file("small.yaml", kSmall);
    const auto out = kScratch / "traj";
    fs::remove_all(out);
    REQUIRE(run("trajectory --config " + cfg.string() + " --out " + out.string() + " --plot") == 0);
    CHECK(line_count(out / "qrdyn_trajectory.csv") == 62);
    CHECK(fs::exists(out / "qrdyn_trajectory.csv.meta.json"));
    CHECK(fs::exists(out / "qrdyn_trajectory_C.svg"));
    CHECK(fs::exists(out / "qrdyn_trajectory_QD.svg"));
    CHECK(fs::exists(out / "qrdyn_trajectory_D_abs.svg"));
}

TEST_CASE("json output") {
    const auto cfg = write_file("small.yaml", kSmall);
    const auto out = kScratch / "json";
    REQUIRE(run("trajectory --config " + cfg.string() + " --out " + out.string() + " --format json") == 0);
    std::ifstream in(out / "qrdyn_trajectory.json");
    std::string first;
    std::getline(in, first);
    CHECK(first.find('{') != std::string::npos);
}

TEST_CASE("sweep then fit-peaks and period from its output") {
    const auto cfg = write_file("grid.yaml", "environment: {N: 20}\ndrive: {tau: 20}\nnumerics: {n_samples: 200}\n"
                                             "reset: {r_grid: [0, 0.01, 0.02, 0.04]}\n");
    const auto out = kScratch / "sweep";
    fs::remove_all(out);
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(line_count(out / "qrdyn_sweep.csv") == 1 + 4 * 201);
    CHECK(line_count(out / "qrdyn_sweep_summary.csv") == 5);
    const auto input = (out / "qrdyn_sweep.csv").string();
    CHECK(run("fit-peaks --input " + input + " --out " + out.string() + " --plot") == 0);
    CHECK(fs::exists(out / "qrdyn_fit.csv"));
    CHECK(run("period --input " + input + " --out " + out.string() + " --measure D_abs") == 0);
    CHECK(line_count(out / "qrdyn_period.csv") == 5);
}

TEST_CASE("configuration errors exit with 1") {
    const auto bad = write_file("bad.yaml", "qubits:\n  a: 1.5\n");
    CHECK(run("trajectory --config " + bad.string()) == 1);
    CHECK(log_text().find("2:6: qubits.a: a must lie in [0,1]") != std::string::npos);
    const auto unknown = write_file("unknown.yaml", "drive: {tua: 1}\n");
    CHECK(run("sweep --config " + unknown.string()) == 1);
    CHECK(log_text().find("drive.tua: unknown key") != std::string::npos);
    CHECK(run("trajectory --config /nonexistent.yaml") == 1);
    CHECK(run("trajectory --format xml") == 1);
    CHECK(run("nonsense") == 1);
    CHECK(run("") == 1);
}

TEST_CASE("numerical failures exit with 2") {
    const auto cfg = write_file("tight.yaml", kSmall + "drive: {tau: 20}\n");
    // Duplicate section is a configuration error, not a numerical one.
    CHECK(run("trajectory --config " + cfg.string()) == 1);
    const auto tight = write_file("tight2.yaml", "environment: {N: 20}\ndrive: {tau: 20}\n"
                                                 "numerics: {n_samples: 60, norm_tolerance: 1e-13}\n");
    CHECK(run("trajectory --config " + tight.string() + " --out " + (kScratch / "tight").string()) == 2);
    CHECK(log_text().find("numerical") != std::string::npos);
}

TEST_CASE("help and version exit with 0") {
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
}
