#pragma once

// Poissonian reset of the environment, averaged over reset histories:
//
//   rho_r(s) = r * int_0^s exp(-r s') rho_0(s') ds' + exp(-r s) rho_0(s),
//
// where rho_0 is the reset-free trajectory and s the time elapsed since the
// start of the ramp. A reset restarts the whole protocol, so rho_0 is always
// evaluated at elapsed time since the last reset.

#include "qrdyn/mode_dynamics.hpp"

#include <span>
#include <vector>

namespace qrdyn {

struct ResetConfig {
    double rate = 0.0;

    void validate() const;
};

// Streaming evaluation of rho_r. The integral is a product trapezoid rule:
// rho_0 is interpolated linearly between the points it is given and the
// exponential weight is integrated exactly, so a constant trajectory is
// reproduced to roundoff and rate 0 returns rho_0 unchanged. The points must
// resolve the oscillations of rho_0; absorb_path takes integrator substeps.
class ResetAccumulator {
public:
    explicit ResetAccumulator(double rate);

    // Absorbs rho_0 at elapsed time s and returns rho_r(s). The first sample
    // must be at s = 0; later samples must be strictly increasing.
    Mat2 absorb(double s, const Mat2& rho0);
    // Absorbs a finely resolved stretch of rho_0: path[i] is rho_0 at
    // last_elapsed() + (i + 1) (s - last_elapsed()) / path.size(), so the last
    // entry is at s. Returns rho_r(s).
    Mat2 absorb_path(double s, std::span<const Mat2> path);
    // Same as absorb_path with rho_0 = |psi><psi| / <psi|psi> for each state.
    Mat2 absorb_states(double s, std::span<const Spinor> states);

    const Mat2& integral_term() const { return integral_; }
    double last_elapsed() const { return last_s_; }
    double rate() const { return rate_; }

    // Largest |tr(rho_r) - 1| seen before any renormalization.
    double max_trace_drift() const { return max_drift_; }
    // Number of samples that were renormalized (drift above 1e-10).
    int renormalized_samples() const { return renormalized_; }

private:
    Mat2 finish(double s, const Mat2& rho0);

    double rate_;
    bool started_ = false;
    double last_s_ = 0.0;
    double last_weight_ = 1.0; // exp(-r * last_s_)
    Mat2 last_rho_{};
    Mat2 integral_{};
    double max_drift_ = 0.0;
    int renormalized_ = 0;
};

struct TimedDensity {
    double s = 0.0;
    ModeDensityMatrix rho;
};

// Batch form of ResetAccumulator. Throws ConfigError for negative rates and
// ContractError for non-monotone sample times.
std::vector<TimedDensity> reset_average_stream(std::span<const TimedDensity> trajectory, double rate);

// rho_r of one branch in the fixed basis at every sample of `grid`. The reset
// integral runs over every integrator substep, so its accuracy does not depend
// on the sample spacing. Each substep state is normalized before use.
std::vector<Mat2> reset_averaged_branch(const Spinor& initial, const ModeIndex& mode, const BranchField& branch,
                                        const RampProtocol& ramp, const SampleGrid& grid, double rate,
                                        const IntegratorOptions& options = {});

// |psi><psi| / <psi|psi>.
Mat2 normalized_projector(const Spinor& psi);

// tr(rho^2).
double reset_purity(const ModeDensityMatrix& rho);

} // namespace qrdyn
