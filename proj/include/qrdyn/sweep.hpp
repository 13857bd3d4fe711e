#pragma once

// Full trajectories and parameter sweeps.
//
// One propagation of all modes serves every reset rate and every Werner
// parameter that share (N, delta, tau, ramp, numerics): reset averaging is a
// post-processing of the reset-free trajectory, and a only enters through the
// closed-form two-qubit measures.

#include "qrdyn/error.hpp"
#include "qrdyn/mode_dynamics.hpp"
#include "qrdyn/reset_ensemble.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrdyn {

// Which instantaneous basis the two branch densities are projected onto before
// the overlap is formed.
enum class OverlapBasis {
    Shared,    // eigenbasis of the unshifted mode Hamiltonian at h(t), used for both branches
    PerBranch, // each branch in the eigenbasis of its own shifted Hamiltonian
};

// Density route evaluates the density-matrix overlap (valid with reset); the
// spinor route evaluates |<psi+|psi->|^2 and is restricted to r = 0.
enum class OverlapRoute { Density, Spinor };

struct RunConfig {
    int n_spins = 500;
    double delta = 0.01;
    double a = 0.9;
    RampProtocol ramp{-5.0, 5.0, 250.0};
    ResetConfig reset{};
    int n_samples = 2000;
    IntegratorOptions integrator{};
    OverlapBasis overlap_basis = OverlapBasis::Shared;
    OverlapRoute route = OverlapRoute::Density;
    // Worker threads over modes; 0 picks the hardware concurrency.
    int threads = 0;

    // Throws ConfigError naming the first violated constraint.
    void validate() const;
};

struct TrajectoryRecord {
    double t = 0.0;
    double h = 0.0;
    double d_abs = 1.0;
    double log_d_abs = 0.0; // ln|D|, kept because |D| underflows deep in the ordered phase
    double concurrence = 0.0;
    double discord = 0.0;
};

struct RunDiagnostics {
    double max_trace_drift = 0.0; // reset averaging, before renormalization
    long renormalized_samples = 0;
    double max_norm_drift = 0.0; // | |psi|^2 - 1 | over all modes, branches, samples
};

struct Trajectory {
    RunConfig config;
    std::vector<TrajectoryRecord> records;
    RunDiagnostics diagnostics;
};

// ln|D| per sample for each requested reset rate.
struct DecoherenceRun {
    SampleGrid grid;
    std::vector<double> rates;
    std::vector<std::vector<double>> log_modulus; // [rate][sample]
    RunDiagnostics diagnostics;
};

// Propagates every mode on both branches once and evaluates the decoherence
// factor for each rate. `base.reset` and `base.a` are ignored. Deterministic
// for any thread count: per-mode overlaps are reduced in ascending k.
DecoherenceRun simulate_decoherence(const RunConfig& base, std::span<const double> rates);

// Builds trajectory records for Werner parameter a from one series of a run.
std::vector<TrajectoryRecord> assemble_records(const DecoherenceRun& run, std::size_t rate_index, double a);

Trajectory run_trajectory(const RunConfig& config);

struct SweepGrid {
    std::vector<double> rates;
    std::vector<double> taus;
    std::vector<double> as;
};

struct SweepPoint {
    double rate = 0.0;
    double tau = 0.0;
    double a = 0.0;

    friend auto operator<=>(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepEntry {
    SweepPoint point;
    std::optional<Trajectory> trajectory;
    // Set when the point failed; the remaining points are unaffected.
    std::optional<ErrorKind> error_kind;
    std::string error;

    bool ok() const { return trajectory.has_value(); }
};

struct SweepResult {
    RunConfig base;
    std::vector<SweepEntry> entries; // lexicographic in (r, tau, a)
};

// Empty axes fall back to the base configuration value. Throws ConfigError
// only for an invalid base; per-point failures become error entries.
SweepResult sweep(const SweepGrid& grid, const RunConfig& base);

} // namespace qrdyn
