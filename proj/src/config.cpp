#include "qrdyn/config.hpp"

#include "qrdyn/correlations.hpp"
#include "qrdyn/error.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace qrdyn {

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_output_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ConfigError("format must be csv or json (got '" + s + "')");
}

std::vector<double> default_rate_grid() { return {0.0, 2.5e-6, 5e-6, 1e-5, 2e-5}; }

SweepGrid JobConfig::sweep_grid() const {
    SweepGrid g = grid;
    if (g.rates.empty()) g.rates = rate_given ? std::vector<double>{base.reset.rate} : default_rate_grid();
    return g;
}

namespace {

std::string basis_name(OverlapBasis b) { return b == OverlapBasis::Shared ? "shared" : "per_branch"; }
std::string route_name(OverlapRoute r) { return r == OverlapRoute::Density ? "density" : "spinor"; }

class Parser {
public:
    Parser(std::string source, JobConfig& job) : source_(std::move(source)), job_(job) {}

    void document(const YAML::Node& root) {
        if (!root || root.IsNull()) return;
        if (!root.IsMap()) fail(root, "", "top level must be a mapping");
        for (const auto& kv : root) {
            const std::string key = kv.first.as<std::string>();
            const YAML::Node& value = kv.second;
            if (sections().count(key)) {
                if (value.IsNull()) continue;
                if (!value.IsMap()) fail(value, key, "expected a mapping");
                for (const auto& inner : value) assign(key + "." + inner.first.as<std::string>(), inner.first, inner.second);
            } else if (auto it = aliases().find(key); it != aliases().end()) {
                assign(it->second, kv.first, value);
            } else {
                fail(kv.first, key, "unknown key");
            }
        }
    }

    void cross_checks(const YAML::Node& root) {
        auto& b = job_.base;
        if (seen_.count("reset.r") && seen_.count("reset.r_grid")) fail(root, "reset", "give either r or r_grid");
        if (seen_.count("drive.tau") && seen_.count("drive.tau_grid")) fail(root, "drive", "give either tau or tau_grid");
        if (seen_.count("qubits.a") && seen_.count("qubits.a_grid")) fail(root, "qubits", "give either a or a_grid");
        try {
            b.ramp.validate();
        } catch (const ConfigError& e) {
            fail(root, "environment", e.what());
        }
        if (b.route == OverlapRoute::Spinor) {
            for (double r : job_.grid.rates) {
                if (r != 0.0) fail(root, "numerics.route", "the spinor route requires r = 0 at every grid point");
            }
        }
        try {
            b.validate();
        } catch (const ConfigError& e) {
            fail(root, "", e.what());
        }
    }

private:
    using Setter = std::function<void(Parser&, const std::string&, const YAML::Node&)>;

    static const std::set<std::string>& sections() {
        static const std::set<std::string> s{"environment", "qubits", "drive", "reset", "numerics", "analysis", "output"};
        return s;
    }

    static const std::map<std::string, std::string>& aliases() {
        static const std::map<std::string, std::string> m{
            {"N", "environment.N"},       {"delta", "environment.delta"}, {"h_i", "environment.h_i"},
            {"h_f", "environment.h_f"},   {"a", "qubits.a"},              {"tau", "drive.tau"},
            {"r", "reset.r"},             {"n_samples", "numerics.n_samples"},
            {"step_safety", "numerics.step_safety"},
        };
        return m;
    }

    static const std::map<std::string, Setter>& setters() {
        static const std::map<std::string, Setter> m{
            {"environment.N",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const int v = p.scalar<int>(n, k);
                 if (v <= 0 || v % 2 != 0) p.fail(n, k, "N must be even and positive");
                 p.job_.base.n_spins = v;
             }},
            {"environment.delta",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const double v = p.scalar<double>(n, k);
                 if (!(v >= 0.0) || !std::isfinite(v)) p.fail(n, k, "delta must be finite and >= 0");
                 p.job_.base.delta = v;
             }},
            {"environment.h_i", [](Parser& p, const std::string& k,
                                   const YAML::Node& n) { p.job_.base.ramp.h_i = p.finite(n, k); }},
            {"environment.h_f", [](Parser& p, const std::string& k,
                                   const YAML::Node& n) { p.job_.base.ramp.h_f = p.finite(n, k); }},
            {"environment.energy_scale",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const double v = p.finite(n, k);
                 if (!(v > 0.0)) p.fail(n, k, "energy_scale must be positive");
                 p.job_.base.integrator.energy_scale = v;
             }},
            {"qubits.a", [](Parser& p, const std::string& k,
                            const YAML::Node& n) { p.job_.base.a = p.werner(n, k, p.scalar<double>(n, k)); }},
            {"qubits.a_grid",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 p.job_.grid.as = p.list(n, k);
                 for (double a : p.job_.grid.as) p.werner(n, k, a);
             }},
            {"drive.tau", [](Parser& p, const std::string& k,
                             const YAML::Node& n) { p.job_.base.ramp.tau = p.ramp_time(n, k, p.scalar<double>(n, k)); }},
            {"drive.tau_grid",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 p.job_.grid.taus = p.list(n, k);
                 for (double t : p.job_.grid.taus) p.ramp_time(n, k, t);
             }},
            {"reset.r",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 p.job_.base.reset.rate = p.rate(n, k, p.scalar<double>(n, k));
                 p.job_.rate_given = true;
             }},
            {"reset.r_grid",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 p.job_.grid.rates = p.list(n, k);
                 for (double r : p.job_.grid.rates) p.rate(n, k, r);
             }},
            {"numerics.n_samples",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const int v = p.scalar<int>(n, k);
                 if (v < 1) p.fail(n, k, "n_samples must be at least 1");
                 p.job_.base.n_samples = v;
             }},
            {"numerics.step_safety",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const double v = p.finite(n, k);
                 if (!(v > 0.0)) p.fail(n, k, "step_safety must be positive");
                 p.job_.base.integrator.step_safety = v;
             }},
            {"numerics.norm_tolerance",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const double v = p.finite(n, k);
                 if (!(v > 0.0)) p.fail(n, k, "norm_tolerance must be positive");
                 p.job_.base.integrator.norm_tolerance = v;
             }},
            {"numerics.overlap_basis",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const auto s = p.scalar<std::string>(n, k);
                 if (s == "shared") p.job_.base.overlap_basis = OverlapBasis::Shared;
                 else if (s == "per_branch") p.job_.base.overlap_basis = OverlapBasis::PerBranch;
                 else p.fail(n, k, "must be shared or per_branch");
             }},
            {"numerics.route",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const auto s = p.scalar<std::string>(n, k);
                 if (s == "density") p.job_.base.route = OverlapRoute::Density;
                 else if (s == "spinor") p.job_.base.route = OverlapRoute::Spinor;
                 else p.fail(n, k, "must be density or spinor");
             }},
            {"numerics.threads",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const int v = p.scalar<int>(n, k);
                 if (v < 0) p.fail(n, k, "threads must be >= 0");
                 p.job_.base.threads = v;
             }},
            {"analysis.measure",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 try {
                     p.job_.analysis.measure = parse_measure(p.scalar<std::string>(n, k));
                 } catch (const ConfigError& e) {
                     p.fail(n, k, e.what());
                 }
             }},
            {"analysis.revival_index",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const int v = p.scalar<int>(n, k);
                 if (v < 0) p.fail(n, k, "revival_index must be >= 0");
                 p.job_.analysis.revival_index = static_cast<std::size_t>(v);
             }},
            {"analysis.h_low", [](Parser& p, const std::string& k,
                                  const YAML::Node& n) { p.job_.analysis.peaks.h_low = p.finite(n, k); }},
            {"analysis.h_high", [](Parser& p, const std::string& k,
                                   const YAML::Node& n) { p.job_.analysis.peaks.h_high = p.finite(n, k); }},
            {"analysis.min_prominence",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const double v = p.finite(n, k);
                 if (v < 0.0) p.fail(n, k, "min_prominence must be >= 0");
                 p.job_.analysis.peaks.min_prominence = v;
             }},
            {"analysis.period_h_min", [](Parser& p, const std::string& k,
                                         const YAML::Node& n) { p.job_.analysis.period.h_min = p.finite(n, k); }},
            {"output.dir", [](Parser& p, const std::string& k,
                              const YAML::Node& n) { p.job_.output.dir = p.scalar<std::string>(n, k); }},
            {"output.prefix",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 const auto s = p.scalar<std::string>(n, k);
                 if (s.empty() || s.find('/') != std::string::npos) p.fail(n, k, "prefix must be a plain file name stem");
                 p.job_.output.prefix = s;
             }},
            {"output.format",
             [](Parser& p, const std::string& k, const YAML::Node& n) {
                 try {
                     p.job_.output.format = parse_output_format(p.scalar<std::string>(n, k));
                 } catch (const ConfigError& e) {
                     p.fail(n, k, e.what());
                 }
             }},
            {"output.plot", [](Parser& p, const std::string& k,
                               const YAML::Node& n) { p.job_.output.plot = p.scalar<bool>(n, k); }},
        };
        return m;
    }

    void assign(const std::string& path, const YAML::Node& key, const YAML::Node& value) {
        const auto it = setters().find(path);
        if (it == setters().end()) fail(key, path, "unknown key");
        if (!seen_.insert(path).second) fail(key, path, "given twice");
        it->second(*this, path, value);
    }

    [[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& message) const {
        std::ostringstream os;
        os << source_;
        const auto mark = node.Mark();
        if (mark.line >= 0) os << ':' << mark.line + 1 << ':' << mark.column + 1;
        os << ": ";
        if (!path.empty()) os << path << ": ";
        os << message;
        throw ConfigError(os.str());
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& path) const {
        if (!n.IsScalar()) fail(n, path, "expected a scalar value");
        try {
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(n, path, "cannot convert '" + n.Scalar() + "' to the expected type");
        }
    }

    double finite(const YAML::Node& n, const std::string& path) const {
        const double v = scalar<double>(n, path);
        if (!std::isfinite(v)) fail(n, path, "must be finite");
        return v;
    }

    std::vector<double> list(const YAML::Node& n, const std::string& path) const {
        if (!n.IsSequence()) fail(n, path, "expected a list of numbers");
        if (n.size() == 0) fail(n, path, "must not be empty");
        std::vector<double> out;
        for (const auto& item : n) out.push_back(finite(item, path));
        return out;
    }

    double werner(const YAML::Node& n, const std::string& path, double a) const {
        try {
            validate_werner_parameter(a);
        } catch (const ConfigError& e) {
            fail(n, path, e.what());
        }
        return a;
    }

    double ramp_time(const YAML::Node& n, const std::string& path, double tau) const {
        if (!(tau > 0.0) || !std::isfinite(tau)) fail(n, path, "tau must be positive and finite");
        return tau;
    }

    double rate(const YAML::Node& n, const std::string& path, double r) const {
        if (!(r >= 0.0) || !std::isfinite(r)) fail(n, path, "r must be finite and >= 0");
        return r;
    }

    std::string source_;
    JobConfig& job_;
    std::set<std::string> seen_;
};

nlohmann::ordered_json axis(double value, const std::vector<double>& grid, const char* scalar_key,
                            const char* grid_key) {
    nlohmann::ordered_json j;
    j[scalar_key] = value;
    if (!grid.empty()) j[grid_key] = grid;
    return j;
}

} // namespace

nlohmann::ordered_json JobConfig::effective() const {
    nlohmann::ordered_json j;
    j["environment"] = {{"N", base.n_spins},
                        {"delta", base.delta},
                        {"h_i", base.ramp.h_i},
                        {"h_f", base.ramp.h_f},
                        {"energy_scale", base.integrator.energy_scale}};
    j["qubits"] = axis(base.a, grid.as, "a", "a_grid");
    j["drive"] = axis(base.ramp.tau, grid.taus, "tau", "tau_grid");
    j["reset"] = axis(base.reset.rate, grid.rates, "r", "r_grid");
    j["numerics"] = {{"n_samples", base.n_samples},
                     {"step_safety", base.integrator.step_safety},
                     {"norm_tolerance", base.integrator.norm_tolerance},
                     {"overlap_basis", basis_name(base.overlap_basis)},
                     {"route", route_name(base.route)}};
    j["analysis"] = {{"measure", to_string(analysis.measure)},
                     {"revival_index", analysis.revival_index},
                     {"h_low", analysis.peaks.h_low},
                     {"h_high", analysis.peaks.h_high},
                     {"min_prominence", analysis.peaks.min_prominence},
                     {"period_h_min", analysis.period.h_min}};
    j["output"] = {{"dir", output.dir},
                   {"prefix", output.prefix},
                   {"format", to_string(output.format)},
                   {"plot", output.plot}};
    return j;
}

JobConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": syntax error: " << e.msg;
        throw ConfigError(os.str());
    }
    JobConfig job;
    Parser parser(source, job);
    parser.document(root);
    parser.cross_checks(root);
    return job;
}

JobConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace qrdyn
