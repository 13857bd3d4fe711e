#pragma once

// Result tables and their CSV/JSON serialization.
//
// CSV cells are either numbers (unquoted, 17 significant digits) or strings
// (always quoted), so a table read back compares equal to the one written.
// A CSV file carries its metadata in a sibling `<path>.meta.json`; JSON output
// embeds it.

#include "qrdyn/analysis.hpp"
#include "qrdyn/config.hpp"
#include "qrdyn/sweep.hpp"

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace qrdyn {

using Cell = std::variant<double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

    // Throws ContractError when the row width differs from the header.
    void add_row(std::vector<Cell> row);
    // Index of a named column; throws ConfigError when missing.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    // Throws ConfigError when the cell is not a number.
    double number(std::size_t row, std::size_t col) const;

    // Cells compare bitwise; metadata is not compared.
    friend bool operator==(const ResultTable& a, const ResultTable& b);
};

std::string format_number(double v);

std::string to_csv(const ResultTable& table);
ResultTable parse_csv(const std::string& text, const std::string& source = "<csv>");
std::string to_json(const ResultTable& table);

std::string metadata_path(const std::string& csv_path);

// Writes `path` (and the metadata sibling for CSV). Throws IoError naming the
// path on failure.
void write_results(const ResultTable& table, OutputFormat format, const std::string& path);
// Reads a CSV table and, when present, its metadata sibling.
ResultTable read_csv(const std::string& path);

// Provenance common to every output: artifact version, kind and the effective
// configuration.
nlohmann::ordered_json output_metadata(const std::string& kind, const nlohmann::ordered_json& config);

ResultTable trajectory_table(const Trajectory& trajectory);
// Long format, one block per successful grid point in sweep order.
ResultTable sweep_table(const SweepResult& sweep);
// One row per grid point, including failed points with their error.
ResultTable sweep_summary_table(const SweepResult& sweep, const AnalysisConfig& analysis);
ResultTable fit_table(const std::vector<PeakFitReport>& reports);
ResultTable period_table(const std::vector<PeriodReport>& reports);

// Rebuilds a sweep from a long table or a trajectory table. Grid coordinates
// missing from the columns are taken from the metadata configuration.
SweepResult sweep_from_table(const ResultTable& table);

} // namespace qrdyn
