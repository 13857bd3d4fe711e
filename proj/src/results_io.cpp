#include "qrdyn/results_io.hpp"

#include "qrdyn/error.hpp"
#include "qrdyn/version.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace qrdyn {

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw ContractError("row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

bool ResultTable::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t ResultTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("table has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

double ResultTable::number(std::size_t row, std::size_t col) const {
    const Cell& c = rows.at(row).at(col);
    if (const double* v = std::get_if<double>(&c)) return *v;
    throw ConfigError("column '" + columns.at(col) + "' row " + std::to_string(row + 1) + " is not a number");
}

bool operator==(const ResultTable& a, const ResultTable& b) {
    if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& ra = a.rows[i];
        const auto& rb = b.rows[i];
        if (ra.size() != rb.size()) return false;
        for (std::size_t j = 0; j < ra.size(); ++j) {
            if (ra[j].index() != rb[j].index()) return false;
            if (const double* x = std::get_if<double>(&ra[j])) {
                if (std::bit_cast<std::uint64_t>(*x) != std::bit_cast<std::uint64_t>(std::get<double>(rb[j]))) {
                    return false;
                }
            } else if (std::get<std::string>(ra[j]) != std::get<std::string>(rb[j])) {
                return false;
            }
        }
    }
    return true;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string header_field(const std::string& s) {
    return s.find_first_of(",\"\n\r") == std::string::npos ? s : quote(s);
}

struct RawField {
    std::string text;
    bool quoted = false;
};

// Splits CSV text into records of fields. Quoted fields may contain commas,
// doubled quotes and newlines.
std::vector<std::vector<RawField>> split_csv(const std::string& text, const std::string& source) {
    std::vector<std::vector<RawField>> records;
    std::vector<RawField> record;
    RawField field;
    std::size_t line = 1;
    std::size_t i = 0;
    bool at_field_start = true;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field = {};
        at_field_start = true;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (at_field_start && c == '"') {
            field.quoted = true;
            at_field_start = false;
            ++i;
            while (true) {
                if (i >= text.size()) throw ConfigError(source + ":" + std::to_string(line) + ": unterminated quote");
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field.text += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (text[i] == '\n') ++line;
                field.text += text[i++];
            }
            if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                throw ConfigError(source + ":" + std::to_string(line) + ": text after closing quote");
            }
            continue;
        }
        at_field_start = false;
        if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            ++i;
        } else if (c == '\n') {
            end_record();
            ++line;
            ++i;
        } else {
            field.text += c;
            ++i;
        }
    }
    if (!at_field_start || !record.empty() || !field.text.empty()) end_record();
    return records;
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const double* v = std::get_if<double>(&c)) {
        if (std::isfinite(*v)) return *v;
        return format_number(*v);
    }
    return std::get<std::string>(c);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read '" + path + "'");
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write '" + path + "': " + std::strerror(errno));
}

Cell optional_cell(const std::optional<double>& v) {
    if (v) return *v;
    return std::string{};
}

} // namespace

std::string to_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += header_field(table.columns[j]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            if (const double* v = std::get_if<double>(&row[j])) out += format_number(*v);
            else out += quote(std::get<std::string>(row[j]));
        }
        out += '\n';
    }
    return out;
}

ResultTable parse_csv(const std::string& text, const std::string& source) {
    const auto records = split_csv(text, source);
    if (records.empty()) throw ConfigError(source + ": empty file, expected a header row");
    ResultTable table;
    for (const auto& f : records.front()) table.columns.push_back(f.text);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != table.columns.size()) {
            throw ConfigError(source + ": record " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                              " fields, header has " + std::to_string(table.columns.size()));
        }
        std::vector<Cell> row;
        row.reserve(rec.size());
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (rec[j].quoted) {
                row.emplace_back(rec[j].text);
                continue;
            }
            const char* begin = rec[j].text.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (rec[j].text.empty() || end != begin + rec[j].text.size()) {
                throw ConfigError(source + ": record " + std::to_string(r + 1) + ", column '" + table.columns[j] +
                                  "': '" + rec[j].text + "' is not a number");
            }
            row.emplace_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string to_json(const ResultTable& table) {
    nlohmann::ordered_json j;
    j["metadata"] = table.metadata;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

std::string metadata_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

void write_results(const ResultTable& table, OutputFormat format, const std::string& path) {
    if (format == OutputFormat::Json) {
        write_file(path, to_json(table));
        return;
    }
    write_file(path, to_csv(table));
    write_file(metadata_path(path), table.metadata.dump(1) + "\n");
}

ResultTable read_csv(const std::string& path) {
    ResultTable table = parse_csv(read_file(path), path);
    const std::string meta = metadata_path(path);
    if (std::ifstream probe(meta); probe) {
        try {
            table.metadata = nlohmann::ordered_json::parse(read_file(meta));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(meta + ": " + e.what());
        }
    }
    return table;
}

nlohmann::ordered_json output_metadata(const std::string& kind, const nlohmann::ordered_json& config) {
    nlohmann::ordered_json j;
    j["artifact"] = "qrdyn";
    j["version"] = kVersion;
    j["kind"] = kind;
    j["config"] = config;
    return j;
}

ResultTable trajectory_table(const Trajectory& trajectory) {
    ResultTable t;
    t.columns = {"t", "h", "D_abs", "ln_D_abs", "C", "QD"};
    t.rows.reserve(trajectory.records.size());
    for (const auto& r : trajectory.records) t.add_row({r.t, r.h, r.d_abs, r.log_d_abs, r.concurrence, r.discord});
    return t;
}

ResultTable sweep_table(const SweepResult& sweep) {
    ResultTable t;
    t.columns = {"r", "tau", "a", "t", "h", "D_abs", "ln_D_abs", "C", "QD"};
    for (const auto& e : sweep.entries) {
        if (!e.ok()) continue;
        for (const auto& r : e.trajectory->records) {
            t.add_row({e.point.rate, e.point.tau, e.point.a, r.t, r.h, r.d_abs, r.log_d_abs, r.concurrence, r.discord});
        }
    }
    return t;
}

ResultTable sweep_summary_table(const SweepResult& sweep, const AnalysisConfig& analysis) {
    ResultTable t;
    t.columns = {"r",           "tau",        "a",       "status", "error",       "regime",
                 "n_peaks_C",   "C_max",      "h_C_max", "QD_max", "h_QD_max",    "peak_spacing",
                 "period_measure", "period",  "max_norm_drift", "max_trace_drift"};
    for (const auto& e : sweep.entries) {
        const double delta = e.trajectory ? e.trajectory->config.delta : sweep.base.delta;
        const std::string regime = strong_coupling(delta, e.point.tau) ? "strong" : "weak";
        if (!e.ok()) {
            const std::string kind = e.error_kind ? to_string(*e.error_kind) : "unknown";
            t.add_row({e.point.rate, e.point.tau, e.point.a, "error:" + kind, e.error, regime, std::string{},
                       std::string{}, std::string{}, std::string{}, std::string{}, std::string{},
                       to_string(analysis.measure), std::string{}, std::string{}, std::string{}});
            continue;
        }
        const auto& rec = e.trajectory->records;
        const auto c = detect_revival_peaks(rec, Measure::Concurrence, analysis.peaks);
        const auto qd = detect_revival_peaks(rec, Measure::Discord, analysis.peaks);
        auto at = [&](const PeakSet& s, bool field) -> Cell {
            if (analysis.revival_index >= s.peaks.size()) return std::string{};
            const auto& p = s.peaks[analysis.revival_index];
            return field ? p.h : p.value;
        };
        const auto period = estimate_oscillation_period(rec, analysis.measure, analysis.period);
        const auto& d = e.trajectory->diagnostics;
        t.add_row({e.point.rate, e.point.tau, e.point.a, "ok", std::string{}, regime,
                   static_cast<double>(c.peaks.size()), at(c, false), at(c, true), at(qd, false), at(qd, true),
                   optional_cell(c.mean_spacing), to_string(analysis.measure), optional_cell(period),
                   d.max_norm_drift, d.max_trace_drift});
    }
    return t;
}

ResultTable fit_table(const std::vector<PeakFitReport>& reports) {
    ResultTable t;
    t.columns = {"measure", "tau",    "a",          "revival_index", "points",        "slope",
                 "intercept", "r_squared", "sufficient", "clear_scaling", "excluded_rates", "error"};
    for (const auto& r : reports) {
        std::vector<Cell> row{to_string(r.measure), r.tau, r.a, static_cast<double>(r.revival_index)};
        if (r.fit) {
            std::string excluded;
            for (double x : r.fit->excluded_rates) excluded += (excluded.empty() ? "" : " ") + format_number(x);
            row.insert(row.end(), {static_cast<double>(r.fit->points), r.fit->slope, r.fit->intercept,
                                   r.fit->r_squared, r.fit->sufficient ? "yes" : "no",
                                   r.fit->clear_scaling ? "yes" : "no", excluded, std::string{}});
        } else {
            row.insert(row.end(), {0.0, std::string{}, std::string{}, std::string{}, "no", "no", std::string{},
                                   r.error});
        }
        t.add_row(std::move(row));
    }
    return t;
}

ResultTable period_table(const std::vector<PeriodReport>& reports) {
    ResultTable t;
    t.columns = {"r", "tau", "a", "measure", "period"};
    for (const auto& p : reports) {
        t.add_row({p.point.rate, p.point.tau, p.point.a, to_string(p.measure), optional_cell(p.period)});
    }
    return t;
}

namespace {

std::optional<double> config_value(const nlohmann::ordered_json& meta, const char* section, const char* key) {
    if (!meta.contains("config")) return std::nullopt;
    const auto& c = meta["config"];
    if (!c.contains(section) || !c[section].contains(key) || !c[section][key].is_number()) return std::nullopt;
    return c[section][key].get<double>();
}

} // namespace

SweepResult sweep_from_table(const ResultTable& table) {
    SweepResult out;
    const auto& meta = table.metadata;
    if (auto v = config_value(meta, "environment", "N")) out.base.n_spins = static_cast<int>(*v);
    if (auto v = config_value(meta, "environment", "delta")) out.base.delta = *v;
    if (auto v = config_value(meta, "environment", "h_i")) out.base.ramp.h_i = *v;
    if (auto v = config_value(meta, "environment", "h_f")) out.base.ramp.h_f = *v;
    if (auto v = config_value(meta, "numerics", "n_samples")) out.base.n_samples = static_cast<int>(*v);
    if (auto v = config_value(meta, "drive", "tau")) out.base.ramp.tau = *v;
    if (auto v = config_value(meta, "qubits", "a")) out.base.a = *v;
    if (auto v = config_value(meta, "reset", "r")) out.base.reset.rate = *v;

    auto coordinate = [&](const char* column, const char* section, const char* key) -> std::optional<std::size_t> {
        if (table.has_column(column)) return table.column(column);
        if (!config_value(meta, section, key)) {
            throw ConfigError(std::string("table has no '") + column + "' column and its metadata does not give " +
                              section + "." + key);
        }
        return std::nullopt;
    };
    const auto ci_r = coordinate("r", "reset", "r");
    const auto ci_tau = coordinate("tau", "drive", "tau");
    const auto ci_a = coordinate("a", "qubits", "a");
    const std::size_t ci_t = table.column("t"), ci_h = table.column("h");
    const std::size_t ci_d = table.column("D_abs"), ci_c = table.column("C"), ci_qd = table.column("QD");
    const bool has_ln = table.has_column("ln_D_abs");
    const std::size_t ci_ln = has_ln ? table.column("ln_D_abs") : 0;

    std::map<SweepPoint, std::vector<TrajectoryRecord>> groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const SweepPoint p{ci_r ? table.number(i, *ci_r) : out.base.reset.rate,
                           ci_tau ? table.number(i, *ci_tau) : out.base.ramp.tau,
                           ci_a ? table.number(i, *ci_a) : out.base.a};
        TrajectoryRecord r;
        r.t = table.number(i, ci_t);
        r.h = table.number(i, ci_h);
        r.d_abs = table.number(i, ci_d);
        r.log_d_abs = has_ln ? table.number(i, ci_ln) : std::log(r.d_abs);
        r.concurrence = table.number(i, ci_c);
        r.discord = table.number(i, ci_qd);
        groups[p].push_back(r);
    }
    for (auto& [p, records] : groups) {
        Trajectory tr;
        tr.config = out.base;
        tr.config.reset.rate = p.rate;
        tr.config.ramp.tau = p.tau;
        tr.config.a = p.a;
        tr.records = std::move(records);
        out.entries.push_back({p, std::move(tr), std::nullopt, {}});
    }
    return out;
}

} // namespace qrdyn
