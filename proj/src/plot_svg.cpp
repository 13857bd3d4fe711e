#include "qrdyn/plot_svg.hpp"

#include "qrdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace qrdyn {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 52.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return lo > hi; }
    void pad() {
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
            const double d = std::max(0.5, std::abs(lo) * 0.1);
            lo -= d;
            hi += d;
        }
    }
};

double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

std::vector<double> ticks(const Range& r, int target) {
    const double step = nice_step(r.hi - r.lo, target);
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write '" + path + "'");
}

} // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xr.add(s.x[i]);
            yr.add(s.y[i]);
        }
    }
    if (xr.empty()) {
        xr = {0.0, 1.0};
        yr = {0.0, 1.0};
    }
    xr.pad();
    yr.pad();
    const double margin = 0.05 * (yr.hi - yr.lo);
    yr.lo -= margin;
    yr.hi += margin;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) +
         "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<metadata>" + escape(spec.metadata.dump()) + "</metadata>\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";

    o += "<g stroke=\"#dddddd\" stroke-width=\"0.5\">\n";
    for (double t : ticks(xr, 8)) {
        o += "<line x1=\"" + fixed(sx(t)) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(sx(t)) + "\" y2=\"" +
             fixed(kTop + ph) + "\"/>\n";
    }
    for (double t : ticks(yr, 6)) {
        o += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(sy(t)) + "\" x2=\"" + fixed(kLeft + pw) + "\" y2=\"" +
             fixed(sy(t)) + "\"/>\n";
    }
    o += "</g>\n";
    o += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(pw) + "\" height=\"" + fixed(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(xr, 8)) {
        o += "<text x=\"" + fixed(sx(t)) + "\" y=\"" + fixed(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
             short_number(t) + "</text>\n";
    }
    for (double t : ticks(yr, 6)) {
        o += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(sy(t) + 4) + "\" text-anchor=\"end\">" +
             short_number(t) + "</text>\n";
    }
    o += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"" + fixed(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
    o += "<text x=\"16\" y=\"" + fixed(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

    for (double g : spec.x_guides) {
        if (g < xr.lo || g > xr.hi) continue;
        o += "<line class=\"guide\" x1=\"" + fixed(sx(g)) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(sx(g)) +
             "\" y2=\"" + fixed(kTop + ph) + "\" stroke=\"#555555\" stroke-dasharray=\"5,4\"/>\n";
    }

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string color = kPalette[k % std::size(kPalette)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.markers) {
            o += "<g class=\"series\" fill=\"" + color + "\">\n";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                o += "<circle cx=\"" + fixed(sx(s.x[i])) + "\" cy=\"" + fixed(sy(s.y[i])) + "\" r=\"3.5\"/>\n";
            }
            o += "</g>\n";
        } else {
            o += "<polyline class=\"series\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (!first) o += ' ';
                o += fixed(sx(s.x[i])) + "," + fixed(sy(s.y[i]));
                first = false;
            }
            o += "\"/>\n";
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        const double lx = kLeft + pw + 14.0;
        if (s.markers) {
            o += "<circle cx=\"" + fixed(lx + 10) + "\" cy=\"" + fixed(ly - 4) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
        } else {
            o += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" + fixed(lx + 20) + "\" y2=\"" +
                 fixed(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        }
        o += "<text class=\"legend\" x=\"" + fixed(lx + 26) + "\" y=\"" + fixed(ly) + "\">" + escape(s.label) +
             "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

bool plot_sweep(const SweepResult& sweep, Measure m, const std::string& path, const nlohmann::ordered_json& metadata) {
    std::set<double> rates, taus, as;
    for (const auto& e : sweep.entries) {
        if (!e.ok() || e.trajectory->records.empty()) continue;
        rates.insert(e.point.rate);
        taus.insert(e.point.tau);
        as.insert(e.point.a);
    }
    std::vector<PlotSeries> series;
    for (const auto& e : sweep.entries) {
        if (!e.ok() || e.trajectory->records.empty()) continue;
        std::string label;
        auto part = [&](const std::set<double>& axis, const char* name, double v) {
            if (axis.size() < 2) return;
            label += (label.empty() ? "" : ", ") + std::string(name) + "=" + short_number(v);
        };
        part(rates, "r", e.point.rate);
        part(taus, "tau", e.point.tau);
        part(as, "a", e.point.a);
        if (label.empty()) {
            label = "r=" + short_number(e.point.rate) + ", tau=" + short_number(e.point.tau);
        }
        series.push_back({label, field_series(e.trajectory->records), measure_series(e.trajectory->records, m), false});
    }
    if (series.empty()) return false;
    PlotSpec spec;
    spec.title = to_string(m) + " versus h";
    spec.y_label = to_string(m);
    spec.x_guides = {-1.0, 1.0};
    spec.metadata = metadata;
    write_text(path, render_svg(spec, series));
    return true;
}

bool plot_fit(const std::vector<PeakFitReport>& reports, const std::string& path,
              const nlohmann::ordered_json& metadata) {
    std::vector<PlotSeries> series;
    for (const auto& r : reports) {
        if (!r.fit) continue;
        PlotSeries points{to_string(r.measure) + " peaks, tau=" + short_number(r.tau) + ", a=" + short_number(r.a),
                          {}, {}, true};
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : r.peaks) {
            if (!p.peak || !(*p.peak > 0.0)) continue;
            points.x.push_back(p.rate);
            points.y.push_back(std::log(*p.peak));
            lo = std::min(lo, p.rate);
            hi = std::max(hi, p.rate);
        }
        PlotSeries line{"fit, R^2=" + short_number(r.fit->r_squared), {lo, hi},
                        {r.fit->intercept + r.fit->slope * lo, r.fit->intercept + r.fit->slope * hi}, false};
        series.push_back(std::move(points));
        series.push_back(std::move(line));
    }
    if (series.empty()) return false;
    PlotSpec spec;
    spec.title = "Revival peak scaling";
    spec.x_label = "r";
    spec.y_label = "ln peak";
    spec.metadata = metadata;
    write_text(path, render_svg(spec, series));
    return true;
}

} // namespace qrdyn
