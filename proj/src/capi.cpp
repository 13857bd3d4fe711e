#include "qrdyn/qrdyn.h"

#include "qrdyn/analysis.hpp"
#include "qrdyn/config.hpp"
#include "qrdyn/error.hpp"
#include "qrdyn/plot_svg.hpp"
#include "qrdyn/results_io.hpp"
#include "qrdyn/version.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct qrdyn_config {
    qrdyn::JobConfig job;
};

struct qrdyn_sweep {
    qrdyn::SweepResult result;
    bool single = false; // produced by a trajectory run or read from a trajectory table
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

struct qrdyn_table {
    qrdyn::ResultTable table;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const std::string& message) {
    g_last_error = message;
    return status;
}

int status_of(qrdyn::ErrorKind kind) {
    using qrdyn::ErrorKind;
    switch (kind) {
    case ErrorKind::Config: return QRDYN_ERR_CONFIG;
    case ErrorKind::Io: return QRDYN_ERR_IO;
    case ErrorKind::Contract: return QRDYN_ERR_CONTRACT;
    case ErrorKind::Degeneracy:
    case ErrorKind::Integration:
    case ErrorKind::Numerical:
    case ErrorKind::Domain: return QRDYN_ERR_NUMERICAL;
    }
    return QRDYN_ERR_INTERNAL;
}

template <class F>
int guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return QRDYN_OK;
    } catch (const qrdyn::Error& e) {
        return fail(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(QRDYN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(QRDYN_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QRDYN_ERR_INTERNAL, "unknown exception");
    }
}

#define QRDYN_REQUIRE(cond, what)                                                                                      \
    do {                                                                                                               \
        if (!(cond)) return fail(QRDYN_ERR_ARGUMENT, what);                                                            \
    } while (0)

char* duplicate(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

qrdyn::Measure measure_from(int m) {
    switch (m) {
    case QRDYN_MEASURE_C: return qrdyn::Measure::Concurrence;
    case QRDYN_MEASURE_QD: return qrdyn::Measure::Discord;
    case QRDYN_MEASURE_D: return qrdyn::Measure::DecoherenceModulus;
    }
    throw qrdyn::ConfigError("unknown measure code " + std::to_string(m));
}

int measure_code(qrdyn::Measure m) {
    switch (m) {
    case qrdyn::Measure::Concurrence: return QRDYN_MEASURE_C;
    case qrdyn::Measure::Discord: return QRDYN_MEASURE_QD;
    case qrdyn::Measure::DecoherenceModulus: return QRDYN_MEASURE_D;
    }
    return QRDYN_MEASURE_C;
}

qrdyn::AnalysisConfig analysis_of(const qrdyn_config* c) { return c ? c->job.analysis : qrdyn::AnalysisConfig{}; }

nlohmann::ordered_json metadata_for(const qrdyn_sweep* s, const std::string& kind) {
    return qrdyn::output_metadata(kind, s->config);
}

nlohmann::ordered_json diagnostics_json(const qrdyn::RunDiagnostics& d) {
    return {{"max_norm_drift", d.max_norm_drift},
            {"max_trace_drift", d.max_trace_drift},
            {"renormalized_samples", d.renormalized_samples}};
}

qrdyn_table* new_table(qrdyn::ResultTable t) { return new qrdyn_table{std::move(t)}; }

} // namespace

extern "C" {

const char* qrdyn_version(void) { return qrdyn::kVersion; }

const char* qrdyn_last_error(void) { return g_last_error.c_str(); }

const char* qrdyn_status_name(int status) {
    switch (status) {
    case QRDYN_OK: return "ok";
    case QRDYN_ERR_CONFIG: return "configuration error";
    case QRDYN_ERR_NUMERICAL: return "numerical failure";
    case QRDYN_ERR_IO: return "i/o error";
    case QRDYN_ERR_CONTRACT: return "contract violation";
    case QRDYN_ERR_ARGUMENT: return "invalid argument";
    case QRDYN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void qrdyn_string_free(char* s) { std::free(s); }

int qrdyn_config_parse(const char* yaml_text, qrdyn_config** out) {
    QRDYN_REQUIRE(yaml_text && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new qrdyn_config{qrdyn::parse_config(yaml_text)}; });
}

int qrdyn_config_load(const char* path, qrdyn_config** out) {
    QRDYN_REQUIRE(path && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new qrdyn_config{qrdyn::load_config(path)}; });
}

void qrdyn_config_free(qrdyn_config* config) { delete config; }

int qrdyn_config_set_threads(qrdyn_config* config, int threads) {
    QRDYN_REQUIRE(config, "null config");
    if (threads < 0) return fail(QRDYN_ERR_CONFIG, "threads must be >= 0");
    config->job.base.threads = threads;
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_config_set_measure(qrdyn_config* config, int measure) {
    QRDYN_REQUIRE(config, "null config");
    return guarded([&] { config->job.analysis.measure = measure_from(measure); });
}

int qrdyn_config_set_output(qrdyn_config* config, const char* dir, int format, int plot) {
    QRDYN_REQUIRE(config, "null config");
    return guarded([&] {
        if (format > QRDYN_FORMAT_JSON) throw qrdyn::ConfigError("format must be csv or json");
        if (dir) config->job.output.dir = dir;
        if (format >= 0) config->job.output.format = format == QRDYN_FORMAT_CSV ? qrdyn::OutputFormat::Csv
                                                                                : qrdyn::OutputFormat::Json;
        if (plot >= 0) config->job.output.plot = plot != 0;
    });
}

int qrdyn_config_get_output(const qrdyn_config* config, const char** dir, const char** prefix, int* format,
                            int* plot) {
    QRDYN_REQUIRE(config, "null config");
    if (dir) *dir = config->job.output.dir.c_str();
    if (prefix) *prefix = config->job.output.prefix.c_str();
    if (format) *format = config->job.output.format == qrdyn::OutputFormat::Csv ? QRDYN_FORMAT_CSV : QRDYN_FORMAT_JSON;
    if (plot) *plot = config->job.output.plot ? 1 : 0;
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_config_get_measure(const qrdyn_config* config, int* measure) {
    QRDYN_REQUIRE(config && measure, "null argument");
    *measure = measure_code(config->job.analysis.measure);
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_config_has_grid(const qrdyn_config* config, int* has_grid) {
    QRDYN_REQUIRE(config && has_grid, "null argument");
    *has_grid = config->job.has_grid() ? 1 : 0;
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_config_effective_json(const qrdyn_config* config, char** out) {
    QRDYN_REQUIRE(config && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = duplicate(config->job.effective().dump(1)); });
}

int qrdyn_run_trajectory(const qrdyn_config* config, qrdyn_sweep** out) {
    QRDYN_REQUIRE(config && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto* s = new qrdyn_sweep;
        try {
            const auto& base = config->job.base;
            qrdyn::Trajectory tr = qrdyn::run_trajectory(base);
            s->result.base = base;
            s->result.entries.push_back({{base.reset.rate, base.ramp.tau, base.a}, std::move(tr), std::nullopt, {}});
            s->single = true;
            s->config = config->job.effective();
        } catch (...) {
            delete s;
            throw;
        }
        *out = s;
    });
}

int qrdyn_run_sweep(const qrdyn_config* config, qrdyn_sweep** out) {
    QRDYN_REQUIRE(config && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto* s = new qrdyn_sweep;
        try {
            s->result = qrdyn::sweep(config->job.sweep_grid(), config->job.base);
            s->config = config->job.effective();
            s->config["reset"]["r_grid"] = config->job.sweep_grid().rates;
        } catch (...) {
            delete s;
            throw;
        }
        *out = s;
    });
}

int qrdyn_sweep_load(const char* csv_path, qrdyn_sweep** out) {
    QRDYN_REQUIRE(csv_path && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        const qrdyn::ResultTable table = qrdyn::read_csv(csv_path);
        auto* s = new qrdyn_sweep;
        try {
            s->result = qrdyn::sweep_from_table(table);
            s->single = !table.has_column("r") && !table.has_column("tau") && !table.has_column("a");
            if (table.metadata.contains("config")) s->config = table.metadata["config"];
        } catch (...) {
            delete s;
            throw;
        }
        *out = s;
    });
}

void qrdyn_sweep_free(qrdyn_sweep* sweep) { delete sweep; }

int qrdyn_sweep_size(const qrdyn_sweep* sweep, size_t* points, size_t* failed) {
    QRDYN_REQUIRE(sweep, "null sweep");
    if (points) *points = sweep->result.entries.size();
    if (failed) {
        *failed = 0;
        for (const auto& e : sweep->result.entries) *failed += e.ok() ? 0 : 1;
    }
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_sweep_error(const qrdyn_sweep* sweep, size_t index, const char** message) {
    QRDYN_REQUIRE(sweep && message, "null argument");
    QRDYN_REQUIRE(index < sweep->result.entries.size(), "sweep index out of range");
    *message = sweep->result.entries[index].error.c_str();
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_sweep_records(const qrdyn_sweep* sweep, qrdyn_table** out) {
    QRDYN_REQUIRE(sweep && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        qrdyn::ResultTable t;
        if (sweep->single && sweep->result.entries.size() == 1 && sweep->result.entries.front().ok()) {
            const auto& tr = *sweep->result.entries.front().trajectory;
            t = qrdyn::trajectory_table(tr);
            t.metadata = metadata_for(sweep, "trajectory");
            t.metadata["diagnostics"] = diagnostics_json(tr.diagnostics);
        } else {
            t = qrdyn::sweep_table(sweep->result);
            t.metadata = metadata_for(sweep, "sweep");
        }
        *out = new_table(std::move(t));
    });
}

int qrdyn_sweep_summary(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out) {
    QRDYN_REQUIRE(sweep && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto t = qrdyn::sweep_summary_table(sweep->result, analysis_of(analysis));
        t.metadata = metadata_for(sweep, "sweep_summary");
        *out = new_table(std::move(t));
    });
}

int qrdyn_fit_peaks(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out) {
    QRDYN_REQUIRE(sweep && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto t = qrdyn::fit_table(qrdyn::fit_sweep_peaks(sweep->result, analysis_of(analysis)));
        t.metadata = metadata_for(sweep, "peak_fit");
        *out = new_table(std::move(t));
    });
}

int qrdyn_periods(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out) {
    QRDYN_REQUIRE(sweep && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto a = analysis_of(analysis);
        auto t = qrdyn::period_table(qrdyn::sweep_periods(sweep->result, a.measure, a.period));
        t.metadata = metadata_for(sweep, "period");
        *out = new_table(std::move(t));
    });
}

void qrdyn_table_free(qrdyn_table* table) { delete table; }

int qrdyn_table_shape(const qrdyn_table* table, size_t* rows, size_t* columns) {
    QRDYN_REQUIRE(table, "null table");
    if (rows) *rows = table->table.rows.size();
    if (columns) *columns = table->table.columns.size();
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_table_column_name(const qrdyn_table* table, size_t column, const char** name) {
    QRDYN_REQUIRE(table && name, "null argument");
    QRDYN_REQUIRE(column < table->table.columns.size(), "column index out of range");
    *name = table->table.columns[column].c_str();
    g_last_error.clear();
    return QRDYN_OK;
}

int qrdyn_table_number(const qrdyn_table* table, size_t row, size_t column, double* value) {
    QRDYN_REQUIRE(table && value, "null argument");
    QRDYN_REQUIRE(row < table->table.rows.size() && column < table->table.columns.size(), "cell index out of range");
    const auto& cell = table->table.rows[row][column];
    if (const double* v = std::get_if<double>(&cell)) {
        *value = *v;
        g_last_error.clear();
        return QRDYN_OK;
    }
    return fail(QRDYN_ERR_CONTRACT, "cell holds text, not a number");
}

int qrdyn_table_text(const qrdyn_table* table, size_t row, size_t column, char** text) {
    QRDYN_REQUIRE(table && text, "null argument");
    QRDYN_REQUIRE(row < table->table.rows.size() && column < table->table.columns.size(), "cell index out of range");
    *text = nullptr;
    return guarded([&] {
        const auto& cell = table->table.rows[row][column];
        const double* v = std::get_if<double>(&cell);
        *text = duplicate(v ? qrdyn::format_number(*v) : std::get<std::string>(cell));
    });
}

int qrdyn_table_write(const qrdyn_table* table, const char* path, int format) {
    QRDYN_REQUIRE(table && path, "null argument");
    QRDYN_REQUIRE(format == QRDYN_FORMAT_CSV || format == QRDYN_FORMAT_JSON, "unknown format");
    return guarded([&] {
        qrdyn::write_results(table->table,
                             format == QRDYN_FORMAT_CSV ? qrdyn::OutputFormat::Csv : qrdyn::OutputFormat::Json, path);
    });
}

int qrdyn_plot_sweep(const qrdyn_sweep* sweep, int measure, const char* path, int* written) {
    QRDYN_REQUIRE(sweep && path, "null argument");
    return guarded([&] {
        const bool ok = qrdyn::plot_sweep(sweep->result, measure_from(measure), path, metadata_for(sweep, "plot"));
        if (written) *written = ok ? 1 : 0;
    });
}

int qrdyn_plot_fit(const qrdyn_sweep* sweep, const qrdyn_config* analysis, const char* path, int* written) {
    QRDYN_REQUIRE(sweep && path, "null argument");
    return guarded([&] {
        const auto reports = qrdyn::fit_sweep_peaks(sweep->result, analysis_of(analysis));
        const bool ok = qrdyn::plot_fit(reports, path, metadata_for(sweep, "fit_plot"));
        if (written) *written = ok ? 1 : 0;
    });
}

} // extern "C"
