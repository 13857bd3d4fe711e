#pragma once

// YAML run/sweep configuration documents.
//
//   environment: {N, delta, h_i, h_f, energy_scale}
//   qubits:      {a | a_grid}
//   drive:       {tau | tau_grid}
//   reset:       {r | r_grid}
//   numerics:    {n_samples, step_safety, norm_tolerance, overlap_basis, route, threads}
//   analysis:    {measure, revival_index, h_low, h_high, min_prominence, period_h_min}
//   output:      {dir, prefix, format, plot}
//
// Scalar parameters may also be written at top level (`tau: 250`).

#include "qrdyn/analysis.hpp"
#include "qrdyn/sweep.hpp"

#include <string>

#include <json.hpp>

namespace qrdyn {

enum class OutputFormat { Csv, Json };

std::string to_string(OutputFormat f);
OutputFormat parse_output_format(const std::string& s);

struct OutputConfig {
    std::string dir = ".";
    std::string prefix = "qrdyn";
    OutputFormat format = OutputFormat::Csv;
    bool plot = false;
};

struct JobConfig {
    RunConfig base{};
    SweepGrid grid{}; // axes given explicitly in the document
    AnalysisConfig analysis{};
    OutputConfig output{};
    bool rate_given = false; // reset.r appeared in the document

    // True when any *_grid key was present.
    bool has_grid() const { return !grid.rates.empty() || !grid.taus.empty() || !grid.as.empty(); }
    // The grid a sweep runs over: explicit axes, else the default rate grid.
    SweepGrid sweep_grid() const;
    // Every value that will be computed, including defaults.
    nlohmann::ordered_json effective() const;
};

// Reset rates used by a sweep whose document names no rate.
std::vector<double> default_rate_grid();

// Throws ConfigError with line/column for malformed YAML and with the key path
// for unknown keys or violated constraints. `source` names the document in
// messages.
JobConfig parse_config(const std::string& text, const std::string& source = "<config>");
JobConfig load_config(const std::string& path);

} // namespace qrdyn
