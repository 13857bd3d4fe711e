#include "qrdyn/sweep.hpp"

#include "parallel.hpp"
#include "qrdyn/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace qrdyn {

void RunConfig::validate() const {
    if (n_spins <= 0 || n_spins % 2 != 0) throw ConfigError("N must be even");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be finite and >= 0");
    validate_werner_parameter(a);
    ramp.validate();
    reset.validate();
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    if (!(integrator.step_safety > 0.0) || !std::isfinite(integrator.step_safety)) {
        throw ConfigError("step_safety must be positive");
    }
    if (!(integrator.energy_scale > 0.0) || !std::isfinite(integrator.energy_scale)) {
        throw ConfigError("energy_scale must be positive");
    }
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (route == OverlapRoute::Spinor && reset.rate != 0.0) {
        throw ConfigError("the spinor overlap route is only defined without reset (r = 0)");
    }
}

namespace {

struct ModeOutput {
    double max_trace_drift = 0.0;
    long renormalized = 0;
    double max_norm_drift = 0.0;
};

Spinor normalized(const Spinor& s) {
    const double n = std::sqrt(s.norm_sq());
    return {s.v / n, s.u / n};
}

EigenPair overlap_basis_for(const RunConfig& cfg, double k, double h, double epsilon) {
    if (cfg.overlap_basis == OverlapBasis::Shared) return instantaneous_eigenbasis(k, h, BranchField::neutral(cfg.delta));
    return instantaneous_eigenbasis(k, h, {epsilon, cfg.delta});
}

BasisTag tag_for(const RunConfig& cfg, double epsilon) {
    if (cfg.overlap_basis == OverlapBasis::Shared) return BasisTag::InstantaneousNeutral;
    return epsilon >= 0.0 ? BasisTag::InstantaneousPlus : BasisTag::InstantaneousMinus;
}

Spinor coefficients_in(const EigenPair& basis, const Spinor& s) {
    return {inner(basis.ground, s), inner(basis.excited, s)};
}

// Evolves one mode on both branches and writes F_k for every (rate, sample)
// into overlaps[(rate * n_samples + sample) * n_modes + mode].
ModeOutput evolve_mode(const RunConfig& cfg, const ModeIndex& mode, std::size_t mode_slot, std::size_t n_modes,
                       const SampleGrid& grid, std::span<const double> rates, std::vector<ModeOverlap>& overlaps) {
    const BranchField plus = BranchField::plus(cfg.delta);
    const BranchField minus = BranchField::minus(cfg.delta);
    // Both branches start from the ground state of the uncoupled chain at h_i.
    const Spinor initial = ground_state_spinor(mode.k, cfg.ramp.h_i, BranchField::neutral(cfg.delta));

    BranchPropagator prop_plus(mode.k, plus, cfg.ramp, cfg.integrator, initial, grid.t[0]);
    BranchPropagator prop_minus(mode.k, minus, cfg.ramp, cfg.integrator, initial, grid.t[0]);
    // Without coupling the two branches solve the same equation.
    const bool same_branches = cfg.delta == 0.0;

    std::vector<ResetAccumulator> acc_plus, acc_minus;
    acc_plus.reserve(rates.size());
    acc_minus.reserve(rates.size());
    for (double r : rates) {
        acc_plus.emplace_back(r);
        acc_minus.emplace_back(r);
    }

    const std::size_t n_samples = grid.size();
    const BasisTag tag_plus = tag_for(cfg, plus.epsilon);
    const BasisTag tag_minus = tag_for(cfg, minus.epsilon);
    ModeOutput out;

    // With reset the integral needs rho_0 at every substep, not only at samples.
    const bool resolve_path = cfg.route == OverlapRoute::Density &&
                              std::any_of(rates.begin(), rates.end(), [](double r) { return r > 0.0; });
    std::vector<Spinor> states_plus, states_minus;

    for (std::size_t j = 0; j < n_samples; ++j) {
        if (j > 0) {
            const int n_sub = substeps_for_interval(grid, j, mode.k, cfg.delta, cfg.integrator);
            if (resolve_path) {
                prop_plus.advance(grid.t[j], n_sub, states_plus);
                if (!same_branches) prop_minus.advance(grid.t[j], n_sub, states_minus);
            } else {
                prop_plus.advance(grid.t[j], n_sub);
                if (!same_branches) prop_minus.advance(grid.t[j], n_sub);
            }
        }
        const Spinor& raw_p = prop_plus.state();
        const Spinor& raw_m = same_branches ? raw_p : prop_minus.state();
        out.max_norm_drift = std::max({out.max_norm_drift, std::abs(raw_p.norm_sq() - 1.0), std::abs(raw_m.norm_sq() - 1.0)});
        const Spinor psi_p = normalized(raw_p);
        const Spinor psi_m = normalized(raw_m);
        const double s = grid.t[j] - grid.t[0];
        const double h = grid.h[j];

        const EigenPair basis_p = overlap_basis_for(cfg, mode.k, h, plus.epsilon);
        const EigenPair basis_m =
            cfg.overlap_basis == OverlapBasis::Shared ? basis_p : overlap_basis_for(cfg, mode.k, h, minus.epsilon);

        const Mat2 rho_p = Mat2::projector(psi_p);
        const Mat2 rho_m = Mat2::projector(psi_m);
        for (std::size_t ri = 0; ri < rates.size(); ++ri) {
            ModeOverlap f;
            if (cfg.route == OverlapRoute::Spinor) {
                f = cfg.overlap_basis == OverlapBasis::Shared
                        ? mode_overlap_pure(psi_p, psi_m)
                        : mode_overlap_pure(coefficients_in(basis_p, psi_p), coefficients_in(basis_m, psi_m));
            } else {
                const bool use_path = j > 0 && rates[ri] > 0.0;
                const ModeDensityMatrix avg_p{use_path ? acc_plus[ri].absorb_states(s, states_plus)
                                                       : acc_plus[ri].absorb(s, rho_p),
                                              BasisTag::Fixed};
                const ModeDensityMatrix avg_m =
                    same_branches ? avg_p
                                  : ModeDensityMatrix{use_path ? acc_minus[ri].absorb_states(s, states_minus)
                                                               : acc_minus[ri].absorb(s, rho_m),
                                                      BasisTag::Fixed};
                f = mode_overlap_mixed(project_to_instantaneous(avg_p, basis_p, tag_plus),
                                       project_to_instantaneous(avg_m, basis_m, tag_minus));
            }
            overlaps[(ri * n_samples + j) * n_modes + mode_slot] = f;
        }
    }
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        for (const auto* acc : {&acc_plus[ri], &acc_minus[ri]}) {
            out.max_trace_drift = std::max(out.max_trace_drift, acc->max_trace_drift());
            out.renormalized += acc->renormalized_samples();
        }
    }
    return out;
}

} // namespace

DecoherenceRun simulate_decoherence(const RunConfig& base, std::span<const double> rates) {
    RunConfig cfg = base;
    cfg.reset.rate = 0.0;
    cfg.a = 0.0;
    cfg.validate();
    if (rates.empty()) throw ConfigError("at least one reset rate is required");
    for (double r : rates) {
        ResetConfig{r}.validate();
        if (cfg.route == OverlapRoute::Spinor && r != 0.0) {
            throw ConfigError("the spinor overlap route is only defined without reset (r = 0)");
        }
    }

    DecoherenceRun run;
    run.grid = SampleGrid::uniform_in_field(cfg.ramp, cfg.n_samples);
    run.rates.assign(rates.begin(), rates.end());
    const auto modes = momentum_grid(cfg.n_spins);
    const std::size_t n_modes = modes.size();
    const std::size_t n_samples = run.grid.size();

    std::vector<ModeOverlap> overlaps(rates.size() * n_samples * n_modes);
    std::vector<ModeOutput> per_mode(n_modes);
    detail::parallel_for(n_modes, cfg.threads, [&](std::size_t i) {
        per_mode[i] = evolve_mode(cfg, modes[i], i, n_modes, run.grid, rates, overlaps);
    });

    for (const auto& m : per_mode) {
        run.diagnostics.max_trace_drift = std::max(run.diagnostics.max_trace_drift, m.max_trace_drift);
        run.diagnostics.renormalized_samples += m.renormalized;
        run.diagnostics.max_norm_drift = std::max(run.diagnostics.max_norm_drift, m.max_norm_drift);
    }

    run.log_modulus.assign(rates.size(), std::vector<double>(n_samples));
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        for (std::size_t j = 0; j < n_samples; ++j) {
            const std::span<const ModeOverlap> row(&overlaps[(ri * n_samples + j) * n_modes], n_modes);
            run.log_modulus[ri][j] = decoherence_factor(row).log_modulus;
        }
    }
    return run;
}

std::vector<TrajectoryRecord> assemble_records(const DecoherenceRun& run, std::size_t rate_index, double a) {
    validate_werner_parameter(a);
    const auto& logs = run.log_modulus.at(rate_index);
    std::vector<TrajectoryRecord> records;
    records.reserve(logs.size());
    for (std::size_t j = 0; j < logs.size(); ++j) {
        const DecoherenceFactor d{logs[j]};
        records.push_back({run.grid.t[j], run.grid.h[j], d.modulus(), d.log_modulus, concurrence(a, d), quantum_discord(a, d)});
    }
    return records;
}

Trajectory run_trajectory(const RunConfig& config) {
    config.validate();
    const double rate = config.reset.rate;
    const DecoherenceRun run = simulate_decoherence(config, std::span<const double>(&rate, 1));
    return {config, assemble_records(run, 0, config.a), run.diagnostics};
}

namespace {

std::vector<double> axis_or(const std::vector<double>& axis, double fallback) {
    std::set<double> values(axis.begin(), axis.end());
    if (values.empty()) values.insert(fallback);
    return {values.begin(), values.end()};
}

} // namespace

SweepResult sweep(const SweepGrid& grid, const RunConfig& base) {
    base.validate();
    const auto rates = axis_or(grid.rates, base.reset.rate);
    const auto taus = axis_or(grid.taus, base.ramp.tau);
    const auto as = axis_or(grid.as, base.a);

    SweepResult result;
    result.base = base;
    std::map<SweepPoint, SweepEntry> table;

    auto fail = [&](const SweepPoint& p, ErrorKind kind, const std::string& what) {
        SweepEntry e{p, std::nullopt, kind, what};
        table.insert_or_assign(p, std::move(e));
    };

    // Points are grouped by tau: one propagation covers all rates and all a.
    for (double tau : taus) {
        RunConfig cfg = base;
        cfg.ramp.tau = tau;
        std::vector<double> valid_rates;
        for (double r : rates) {
            try {
                ResetConfig{r}.validate();
                valid_rates.push_back(r);
            } catch (const Error& e) {
                for (double a : as) fail({r, tau, a}, e.kind(), e.what());
            }
        }
        if (valid_rates.empty()) continue;
        try {
            cfg.reset.rate = valid_rates.front();
            cfg.a = base.a;
            cfg.validate();
            const DecoherenceRun run = simulate_decoherence(cfg, valid_rates);
            for (std::size_t ri = 0; ri < valid_rates.size(); ++ri) {
                for (double a : as) {
                    const SweepPoint p{valid_rates[ri], tau, a};
                    try {
                        RunConfig point_cfg = cfg;
                        point_cfg.reset.rate = valid_rates[ri];
                        point_cfg.a = a;
                        point_cfg.validate();
                        Trajectory traj{point_cfg, assemble_records(run, ri, a), run.diagnostics};
                        table.insert_or_assign(p, SweepEntry{p, std::move(traj), std::nullopt, {}});
                    } catch (const Error& e) {
                        fail(p, e.kind(), e.what());
                    }
                }
            }
        } catch (const Error& e) {
            for (double r : valid_rates) {
                for (double a : as) fail({r, tau, a}, e.kind(), e.what());
            }
        }
    }
    result.entries.reserve(table.size());
    for (auto& [p, e] : table) result.entries.push_back(std::move(e));
    return result;
}

} // namespace qrdyn
