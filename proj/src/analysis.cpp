#include "qrdyn/analysis.hpp"

#include "qrdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace qrdyn {

double measure_of(const TrajectoryRecord& r, Measure m) {
    switch (m) {
    case Measure::Concurrence: return r.concurrence;
    case Measure::Discord: return r.discord;
    case Measure::DecoherenceModulus: return r.d_abs;
    }
    return 0.0;
}

std::vector<double> measure_series(std::span<const TrajectoryRecord> records, Measure m) {
    std::vector<double> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(measure_of(r, m));
    return y;
}

std::vector<double> field_series(std::span<const TrajectoryRecord> records) {
    std::vector<double> h;
    h.reserve(records.size());
    for (const auto& r : records) h.push_back(r.h);
    return h;
}

std::string to_string(Measure m) {
    switch (m) {
    case Measure::Concurrence: return "C";
    case Measure::Discord: return "QD";
    case Measure::DecoherenceModulus: return "D_abs";
    }
    return "?";
}

Measure parse_measure(const std::string& s) {
    if (s == "C" || s == "concurrence") return Measure::Concurrence;
    if (s == "QD" || s == "discord") return Measure::Discord;
    if (s == "D" || s == "D_abs" || s == "decoherence") return Measure::DecoherenceModulus;
    throw ConfigError("unknown measure '" + s + "' (expected C, QD or D_abs)");
}

namespace {

struct Extremum {
    double position;
    double value;
    std::size_t index;
};

// Local maxima of y[lo..hi) with prominence >= min_prominence, refined by a
// parabola through the three samples around each maximum.
std::vector<Extremum> local_maxima(std::span<const double> x, std::span<const double> y, std::size_t lo,
                                   std::size_t hi, double min_prominence) {
    std::vector<Extremum> out;
    if (hi < lo + 3) return out;
    for (std::size_t j = lo + 1; j + 1 < hi; ++j) {
        if (!(y[j] > y[j - 1] && y[j] >= y[j + 1])) continue;

        double left_min = y[j];
        for (std::size_t i = j; i-- > lo;) {
            if (y[i] > y[j]) break;
            left_min = std::min(left_min, y[i]);
        }
        double right_min = y[j];
        for (std::size_t i = j + 1; i < hi; ++i) {
            if (y[i] > y[j]) break;
            right_min = std::min(right_min, y[i]);
        }
        if (y[j] - std::max(left_min, right_min) < min_prominence) continue;

        const double y0 = y[j - 1], y1 = y[j], y2 = y[j + 1];
        const double curvature = y0 - 2.0 * y1 + y2;
        double offset = 0.0;
        if (curvature < 0.0) offset = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
        // Samples are not required to be equally spaced; interpolate toward the
        // neighbour on the side of the offset.
        const double pos = offset >= 0.0 ? x[j] + offset * (x[j + 1] - x[j]) : x[j] + offset * (x[j] - x[j - 1]);
        const double value = y1 - 0.25 * (y0 - y2) * offset;
        out.push_back({pos, value, j});
    }
    return out;
}

std::optional<double> mean_successive_spacing(const std::vector<Extremum>& ext) {
    if (ext.size() < 2) return std::nullopt;
    return (ext.back().position - ext.front().position) / static_cast<double>(ext.size() - 1);
}

void check_series(std::span<const double> h, std::span<const double> y) {
    if (h.size() != y.size()) throw ContractError("field and measure series differ in length");
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (!(h[i] > h[i - 1])) throw ContractError("field values must be strictly increasing");
    }
}

} // namespace

PeakSet detect_revival_peaks(std::span<const double> h, std::span<const double> y, const PeakOptions& options) {
    check_series(h, y);
    PeakSet set;
    if (y.empty()) return set;
    // Samples inside the open window; one extra neighbour on each side for the
    // three-point test.
    std::size_t first = 0;
    while (first < h.size() && !(h[first] > options.h_low)) ++first;
    std::size_t last = first;
    while (last < h.size() && h[last] < options.h_high) ++last;
    if (first == last) return set;
    const std::size_t lo = first > 0 ? first - 1 : first;
    const std::size_t hi = std::min(last + 1, h.size());

    const double cap = y.front();
    for (const auto& e : local_maxima(h, y, lo, hi, options.min_prominence)) {
        if (e.index < first || e.index >= last) continue;
        // The parabola can overshoot a plateau; a revival never exceeds the
        // initial value.
        set.peaks.push_back({e.position, std::min(e.value, std::max(cap, y[e.index])), e.index});
    }
    if (set.peaks.size() >= 2) {
        set.mean_spacing = (set.peaks.back().h - set.peaks.front().h) / static_cast<double>(set.peaks.size() - 1);
    }
    return set;
}

PeakSet detect_revival_peaks(std::span<const TrajectoryRecord> records, Measure m, const PeakOptions& options) {
    const auto h = field_series(records);
    const auto y = measure_series(records, m);
    return detect_revival_peaks(h, y, options);
}

std::optional<double> revival_peak(const PeakSet& peaks, std::size_t index) {
    if (index >= peaks.peaks.size()) return std::nullopt;
    return peaks.peaks[index].value;
}

ScalingFit fit_peak_scaling(std::span<const RatePeak> peaks) {
    ScalingFit fit;
    std::vector<double> xs, ys;
    for (const auto& p : peaks) {
        if (!p.peak || !(*p.peak > 0.0)) {
            fit.excluded_rates.push_back(p.rate);
            continue;
        }
        xs.push_back(p.rate);
        ys.push_back(std::log(*p.peak));
    }
    if (xs.size() < 2) throw DomainError("peak scaling fit needs at least two rates with a nonzero peak");

    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DomainError("peak scaling fit needs at least two distinct rates");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points = xs.size();

    std::vector<double> distinct = xs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    fit.sufficient = distinct.size() >= 4;
    fit.clear_scaling = fit.sufficient && fit.r_squared >= 0.95;
    return fit;
}

std::optional<double> estimate_oscillation_period(std::span<const double> h, std::span<const double> y,
                                                  const PeriodOptions& options) {
    check_series(h, y);
    std::vector<double> ln_y(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ln_y[i] = std::log(std::max(y[i], options.floor));
    return estimate_log_oscillation_period(h, ln_y, options);
}

std::optional<double> estimate_log_oscillation_period(std::span<const double> h, std::span<const double> ln_y,
                                                      const PeriodOptions& options) {
    check_series(h, ln_y);
    std::vector<double> hs, z;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > options.h_min && std::isfinite(ln_y[i])) {
            hs.push_back(h[i]);
            z.push_back(ln_y[i]);
        }
    }
    if (hs.size() < 3) return std::nullopt;

    // Remove the decaying envelope with a least-squares line in log space.
    const double n = static_cast<double>(hs.size());
    const double mh = std::accumulate(hs.begin(), hs.end(), 0.0) / n;
    const double mz = std::accumulate(z.begin(), z.end(), 0.0) / n;
    double shh = 0.0, shz = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        shh += (hs[i] - mh) * (hs[i] - mh);
        shz += (hs[i] - mh) * (z[i] - mz);
    }
    const double slope = shh > 0.0 ? shz / shh : 0.0;
    std::vector<double> neg(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] -= mz + slope * (hs[i] - mh);
        neg[i] = -z[i];
    }

    const auto maxima = local_maxima(hs, z, 0, z.size(), options.min_prominence);
    const auto minima = local_maxima(hs, neg, 0, neg.size(), options.min_prominence);
    const auto pmax = mean_successive_spacing(maxima);
    const auto pmin = mean_successive_spacing(minima);
    if (!pmax && !pmin) return std::nullopt;
    if (pmax && pmin) {
        const double wmax = static_cast<double>(maxima.size() - 1);
        const double wmin = static_cast<double>(minima.size() - 1);
        return (*pmax * wmax + *pmin * wmin) / (wmax + wmin);
    }
    return pmax ? pmax : pmin;
}

std::optional<double> estimate_oscillation_period(std::span<const TrajectoryRecord> records, Measure m,
                                                  const PeriodOptions& options) {
    const auto h = field_series(records);
    if (m != Measure::DecoherenceModulus) return estimate_oscillation_period(h, measure_series(records, m), options);
    std::vector<double> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(r.log_d_abs);
    return estimate_log_oscillation_period(h, y, options);
}

std::vector<RatePeak> collect_revival_peaks(const SweepResult& sweep, double tau, double a, Measure m,
                                            std::size_t revival_index, const PeakOptions& options) {
    std::vector<RatePeak> out;
    for (const auto& e : sweep.entries) {
        if (e.point.tau != tau || e.point.a != a) continue;
        RatePeak rp{e.point.rate, std::nullopt};
        if (e.ok()) rp.peak = revival_peak(detect_revival_peaks(e.trajectory->records, m, options), revival_index);
        out.push_back(rp);
    }
    return out;
}

bool strong_coupling(double delta, double tau) { return delta > std::numbers::pi / (16.0 * tau); }

std::vector<PeakFitReport> fit_sweep_peaks(const SweepResult& sweep, const AnalysisConfig& config) {
    std::set<std::pair<double, double>> slices;
    for (const auto& e : sweep.entries) slices.insert({e.point.tau, e.point.a});
    std::vector<PeakFitReport> out;
    for (const auto& [tau, a] : slices) {
        for (Measure m : {Measure::Concurrence, Measure::Discord}) {
            PeakFitReport report;
            report.tau = tau;
            report.a = a;
            report.measure = m;
            report.revival_index = config.revival_index;
            report.peaks = collect_revival_peaks(sweep, tau, a, m, config.revival_index, config.peaks);
            try {
                report.fit = fit_peak_scaling(report.peaks);
            } catch (const DomainError& e) {
                report.error = e.what();
            }
            out.push_back(std::move(report));
        }
    }
    return out;
}

std::vector<PeriodReport> sweep_periods(const SweepResult& sweep, Measure m, const PeriodOptions& options) {
    std::vector<PeriodReport> out;
    for (const auto& e : sweep.entries) {
        if (!e.ok()) continue;
        out.push_back({e.point, m, estimate_oscillation_period(e.trajectory->records, m, options)});
    }
    return out;
}

} // namespace qrdyn
