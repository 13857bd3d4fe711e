#pragma once

// Revival peaks, exponential peak-rate scaling and oscillation periods of
// trajectory measures.

#include "qrdyn/sweep.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrdyn {

enum class Measure { Concurrence, Discord, DecoherenceModulus };

double measure_of(const TrajectoryRecord& r, Measure m);
std::vector<double> measure_series(std::span<const TrajectoryRecord> records, Measure m);
std::vector<double> field_series(std::span<const TrajectoryRecord> records);

std::string to_string(Measure m);
// Accepts "C", "QD", "D" (and the long forms); throws ConfigError otherwise.
Measure parse_measure(const std::string& s);

struct Peak {
    double h = 0.0;     // parabolic vertex
    double value = 0.0; // vertex value, capped at the series start value
    std::size_t sample = 0;
};

struct PeakSet {
    std::vector<Peak> peaks; // ascending h
    // Mean spacing of successive peaks; empty with fewer than two peaks.
    std::optional<double> mean_spacing;
};

struct PeakOptions {
    double h_low = -1.0; // open window (h_low, h_high)
    double h_high = 1.0;
    // Peaks whose topographic prominence is below this are treated as noise.
    double min_prominence = 1e-6;
};

// Three-point local maxima with parabolic refinement.
PeakSet detect_revival_peaks(std::span<const double> h, std::span<const double> y, const PeakOptions& options = {});
PeakSet detect_revival_peaks(std::span<const TrajectoryRecord> records, Measure m, const PeakOptions& options = {});

// Peak height of the revival with the given index (0 = first above h_low).
std::optional<double> revival_peak(const PeakSet& peaks, std::size_t index);

struct RatePeak {
    double rate = 0.0;
    std::optional<double> peak; // absent when the revival was not found
};

struct ScalingFit {
    double slope = 0.0;     // d ln(peak) / dr
    double intercept = 0.0; // ln(peak) at r = 0
    double r_squared = 0.0;
    std::size_t points = 0;
    std::vector<double> excluded_rates; // missing or vanishing peaks
    bool sufficient = false;            // at least four distinct rates used
    bool clear_scaling = false;         // sufficient and R^2 >= 0.95
};

// Least squares line through (r, ln peak). Throws DomainError with fewer than
// two usable points.
ScalingFit fit_peak_scaling(std::span<const RatePeak> peaks);

struct PeriodOptions {
    double h_min = 1.0;
    // Extrema of the detrended log series below this prominence are ignored.
    double min_prominence = 1e-9;
    // Lower cutoff applied before taking logarithms.
    double floor = 1e-300;
};

// Mean spacing of successive minima and of successive maxima of the log
// series, linearly detrended over h > h_min. Absent with fewer than two
// extrema of either kind.
std::optional<double> estimate_oscillation_period(std::span<const double> h, std::span<const double> y,
                                                  const PeriodOptions& options = {});
// Same, for a series that is already logarithmic. Non-finite samples are skipped.
std::optional<double> estimate_log_oscillation_period(std::span<const double> h, std::span<const double> ln_y,
                                                      const PeriodOptions& options = {});
// The modulus measure uses the stored ln|D| directly.
std::optional<double> estimate_oscillation_period(std::span<const TrajectoryRecord> records, Measure m,
                                                  const PeriodOptions& options = {});

// Strong coupling when delta exceeds pi / (16 tau); revivals need it.
bool strong_coupling(double delta, double tau);

struct AnalysisConfig {
    Measure measure = Measure::Concurrence;
    std::size_t revival_index = 0;
    PeakOptions peaks{};
    PeriodOptions period{};
};

// Peak scaling of one measure over the rates of one (tau, a) slice of a sweep.
struct PeakFitReport {
    double tau = 0.0;
    double a = 0.0;
    Measure measure = Measure::Concurrence;
    std::size_t revival_index = 0;
    std::vector<RatePeak> peaks;
    std::optional<ScalingFit> fit;
    std::string error; // why the fit is absent
};

// Concurrence and discord fits for every (tau, a) slice, in ascending (tau, a).
std::vector<PeakFitReport> fit_sweep_peaks(const SweepResult& sweep, const AnalysisConfig& config);

struct PeriodReport {
    SweepPoint point;
    Measure measure = Measure::Concurrence;
    std::optional<double> period;
};

// One entry per successful sweep point, in sweep order.
std::vector<PeriodReport> sweep_periods(const SweepResult& sweep, Measure m, const PeriodOptions& options = {});

// Peaks of each sweep entry, keyed by the entry's reset rate, for one tau and a.
std::vector<RatePeak> collect_revival_peaks(const SweepResult& sweep, double tau, double a, Measure m,
                                            std::size_t revival_index, const PeakOptions& options = {});

} // namespace qrdyn
