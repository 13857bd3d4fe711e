// qrdyn command line front end. Uses only the C interface.

#include "qrdyn/qrdyn.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int exit_code(int status) {
    switch (status) {
    case QRDYN_OK: return kExitOk;
    case QRDYN_ERR_CONFIG:
    case QRDYN_ERR_IO:
    case QRDYN_ERR_ARGUMENT: return kExitConfig;
    default: return kExitNumerical;
    }
}

// Carries a failed status out of nested helpers.
struct Failure {
    int status;
};

void check(int status) {
    if (status != QRDYN_OK) {
        std::fprintf(stderr, "qrdyn: %s: %s\n", qrdyn_status_name(status), qrdyn_last_error());
        throw Failure{status};
    }
}

struct ConfigDeleter {
    void operator()(qrdyn_config* c) const { qrdyn_config_free(c); }
};
struct SweepDeleter {
    void operator()(qrdyn_sweep* s) const { qrdyn_sweep_free(s); }
};
struct TableDeleter {
    void operator()(qrdyn_table* t) const { qrdyn_table_free(t); }
};
using ConfigPtr = std::unique_ptr<qrdyn_config, ConfigDeleter>;
using SweepPtr = std::unique_ptr<qrdyn_sweep, SweepDeleter>;
using TablePtr = std::unique_ptr<qrdyn_table, TableDeleter>;

struct Options {
    std::string config;
    std::string input;
    std::string out;
    std::string format;
    std::string measure;
    bool plot = false;
    std::optional<int> threads;
};

int measure_code(const std::string& m) {
    if (m == "C") return QRDYN_MEASURE_C;
    if (m == "QD") return QRDYN_MEASURE_QD;
    return QRDYN_MEASURE_D;
}

const char* measure_name(int m) {
    switch (m) {
    case QRDYN_MEASURE_C: return "C";
    case QRDYN_MEASURE_QD: return "QD";
    default: return "D_abs";
    }
}

ConfigPtr load(const Options& o) {
    qrdyn_config* raw = nullptr;
    if (o.config.empty()) check(qrdyn_config_parse("{}", &raw));
    else check(qrdyn_config_load(o.config.c_str(), &raw));
    ConfigPtr cfg(raw);
    const int format = o.format.empty() ? -1 : o.format == "json" ? QRDYN_FORMAT_JSON : QRDYN_FORMAT_CSV;
    check(qrdyn_config_set_output(cfg.get(), o.out.empty() ? nullptr : o.out.c_str(), format, o.plot ? 1 : -1));
    if (o.threads) check(qrdyn_config_set_threads(cfg.get(), *o.threads));
    if (!o.measure.empty()) check(qrdyn_config_set_measure(cfg.get(), measure_code(o.measure)));
    return cfg;
}

struct Destination {
    std::filesystem::path dir;
    std::string prefix;
    int format = QRDYN_FORMAT_CSV;
    bool plot = false;

    std::string path(const std::string& suffix, const std::string& ext) const {
        return (dir / (prefix + "_" + suffix + "." + ext)).string();
    }
    std::string table_path(const std::string& suffix) const {
        return path(suffix, format == QRDYN_FORMAT_JSON ? "json" : "csv");
    }
};

Destination destination(const qrdyn_config* cfg) {
    const char* dir = nullptr;
    const char* prefix = nullptr;
    int format = 0, plot = 0;
    check(qrdyn_config_get_output(cfg, &dir, &prefix, &format, &plot));
    Destination d{dir, prefix, format, plot != 0};
    std::error_code ec;
    std::filesystem::create_directories(d.dir, ec);
    if (ec) {
        std::fprintf(stderr, "qrdyn: cannot create output directory '%s': %s\n", d.dir.string().c_str(),
                     ec.message().c_str());
        throw Failure{QRDYN_ERR_IO};
    }
    return d;
}

void write(const qrdyn_table* table, const std::string& path, int format) {
    check(qrdyn_table_write(table, path.c_str(), format));
    std::printf("wrote %s\n", path.c_str());
}

void plot_measures(const qrdyn_sweep* sweep, const Destination& d, const std::string& suffix) {
    for (int m : {QRDYN_MEASURE_C, QRDYN_MEASURE_QD, QRDYN_MEASURE_D}) {
        const std::string path = d.path(suffix + "_" + measure_name(m), "svg");
        int written = 0;
        check(qrdyn_plot_sweep(sweep, m, path.c_str(), &written));
        if (written) std::printf("wrote %s\n", path.c_str());
        else std::fprintf(stderr, "qrdyn: warning: nothing to plot for %s\n", measure_name(m));
    }
}

void warn_failures(const qrdyn_sweep* sweep) {
    std::size_t points = 0, failed = 0;
    check(qrdyn_sweep_size(sweep, &points, &failed));
    if (failed) std::fprintf(stderr, "qrdyn: warning: %zu of %zu grid points failed (see summary)\n", failed, points);
}

// The sweep to analyse: read from --input, else computed from the config.
SweepPtr source_sweep(const Options& o, const qrdyn_config* cfg) {
    qrdyn_sweep* raw = nullptr;
    if (!o.input.empty()) check(qrdyn_sweep_load(o.input.c_str(), &raw));
    else check(qrdyn_run_sweep(cfg, &raw));
    return SweepPtr(raw);
}

void run_trajectory(const Options& o) {
    const ConfigPtr cfg = load(o);
    int has_grid = 0;
    check(qrdyn_config_has_grid(cfg.get(), &has_grid));
    if (has_grid) std::fprintf(stderr, "qrdyn: note: grid keys are ignored by 'trajectory'; use 'sweep'\n");
    const Destination d = destination(cfg.get());
    qrdyn_sweep* raw = nullptr;
    check(qrdyn_run_trajectory(cfg.get(), &raw));
    const SweepPtr sweep(raw);
    qrdyn_table* t = nullptr;
    check(qrdyn_sweep_records(sweep.get(), &t));
    write(TablePtr(t).get(), d.table_path("trajectory"), d.format);
    if (d.plot) plot_measures(sweep.get(), d, "trajectory");
}

void run_sweep(const Options& o) {
    const ConfigPtr cfg = load(o);
    const Destination d = destination(cfg.get());
    qrdyn_sweep* raw = nullptr;
    check(qrdyn_run_sweep(cfg.get(), &raw));
    const SweepPtr sweep(raw);
    warn_failures(sweep.get());
    qrdyn_table* t = nullptr;
    check(qrdyn_sweep_records(sweep.get(), &t));
    write(TablePtr(t).get(), d.table_path("sweep"), d.format);
    check(qrdyn_sweep_summary(sweep.get(), cfg.get(), &t));
    write(TablePtr(t).get(), d.table_path("sweep_summary"), d.format);
    if (d.plot) plot_measures(sweep.get(), d, "sweep");
}

void run_fit(const Options& o) {
    const ConfigPtr cfg = load(o);
    const Destination d = destination(cfg.get());
    const SweepPtr sweep = source_sweep(o, cfg.get());
    qrdyn_table* t = nullptr;
    check(qrdyn_fit_peaks(sweep.get(), cfg.get(), &t));
    write(TablePtr(t).get(), d.table_path("fit"), d.format);
    if (d.plot) {
        const std::string path = d.path("fit", "svg");
        int written = 0;
        check(qrdyn_plot_fit(sweep.get(), cfg.get(), path.c_str(), &written));
        if (written) std::printf("wrote %s\n", path.c_str());
        else std::fprintf(stderr, "qrdyn: warning: no fit to plot\n");
    }
}

void run_period(const Options& o) {
    const ConfigPtr cfg = load(o);
    const Destination d = destination(cfg.get());
    const SweepPtr sweep = source_sweep(o, cfg.get());
    qrdyn_table* t = nullptr;
    check(qrdyn_periods(sweep.get(), cfg.get(), &t));
    write(TablePtr(t).get(), d.table_path("period"), d.format);
    if (d.plot) {
        int m = QRDYN_MEASURE_C;
        check(qrdyn_config_get_measure(cfg.get(), &m));
        const std::string path = d.path(std::string("period_") + measure_name(m), "svg");
        int written = 0;
        check(qrdyn_plot_sweep(sweep.get(), m, path.c_str(), &written));
        if (written) std::printf("wrote %s\n", path.c_str());
        else std::fprintf(stderr, "qrdyn: warning: nothing to plot\n");
    }
}

void add_common(CLI::App* cmd, Options& o, bool analysis) {
    cmd->add_option("--config", o.config, "YAML configuration file (defaults when omitted)")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory (overrides output.dir)");
    cmd->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--plot", o.plot, "also write SVG plots");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    if (analysis) {
        cmd->add_option("--input", o.input, "trajectory or sweep CSV to analyse instead of running the config")
            ->check(CLI::ExistingFile);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation dynamics of two qubits coupled to a reset-driven Ising chain"};
    app.set_version_flag("--version", qrdyn_version());
    app.require_subcommand(1);

    Options o;
    auto* traj = app.add_subcommand("trajectory", "run one trajectory");
    add_common(traj, o, false);
    auto* sweep = app.add_subcommand("sweep", "run a grid over r, tau and a");
    add_common(sweep, o, false);
    auto* fit = app.add_subcommand("fit-peaks", "fit ln(peak) against r for C and QD");
    add_common(fit, o, true);
    auto* period = app.add_subcommand("period", "oscillation period beyond the second critical point");
    add_common(period, o, true);
    period->add_option("--measure", o.measure, "measure whose extrema are counted")
        ->check(CLI::IsMember({"C", "QD", "D_abs"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*traj) run_trajectory(o);
        else if (*sweep) run_sweep(o);
        else if (*fit) run_fit(o);
        else if (*period) run_period(o);
    } catch (const Failure& f) {
        return exit_code(f.status);
    }
    return kExitOk;
}
