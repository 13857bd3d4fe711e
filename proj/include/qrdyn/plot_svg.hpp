#pragma once

// Static SVG line and scatter plots. Output bytes depend only on the inputs.

#include "qrdyn/analysis.hpp"
#include "qrdyn/sweep.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace qrdyn {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y; // non-finite points are skipped
    bool markers = false;     // scatter instead of a polyline
};

struct PlotSpec {
    std::string title;
    std::string x_label = "h";
    std::string y_label;
    std::vector<double> x_guides; // dashed vertical lines
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

// One curve per successful grid point, labelled with the coordinates that
// vary across the sweep, with guides at the critical fields h = -1 and 1.
// Returns false and writes nothing when there is nothing to draw.
bool plot_sweep(const SweepResult& sweep, Measure m, const std::string& path,
                const nlohmann::ordered_json& metadata = nlohmann::ordered_json::object());

// Scatter of (r, ln peak) with the fitted line, one pair per report that has a fit.
bool plot_fit(const std::vector<PeakFitReport>& reports, const std::string& path,
              const nlohmann::ordered_json& metadata = nlohmann::ordered_json::object());

} // namespace qrdyn
