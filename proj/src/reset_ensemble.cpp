#include "qrdyn/reset_ensemble.hpp"

#include "qrdyn/error.hpp"

#include <cmath>

namespace qrdyn {

namespace {

constexpr double kTraceDriftLimit = 1e-10;

// Weights of the left and right endpoint for
//   int_0^x exp(-y) * (linear interpolant) dy,
// i.e. left = int (1 - y/x) e^{-y}, right = int (y/x) e^{-y}.
struct EndpointWeights {
    double left;
    double right;
};

EndpointWeights exponential_trapezoid(double x) {
    const double total = -std::expm1(-x); // 1 - e^{-x}
    double right;
    if (x < 1e-3) {
        // x/2 - x^2/3 + x^3/8 - x^4/30
        right = x * (0.5 - x * (1.0 / 3.0 - x * (0.125 - x / 30.0)));
    } else {
        right = (total - x * std::exp(-x)) / x;
    }
    return {total - right, right};
}

} // namespace

void ResetConfig::validate() const {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw ConfigError("reset rate r must be finite and >= 0");
}

ResetAccumulator::ResetAccumulator(double rate) : rate_(rate) {
    ResetConfig{rate}.validate();
}

Mat2 ResetAccumulator::absorb(double s, const Mat2& rho0) {
    if (!started_) {
        if (s != 0.0) throw ContractError("reset trajectory must start at elapsed time 0");
        started_ = true;
        last_s_ = 0.0;
        last_weight_ = 1.0;
        last_rho_ = rho0;
        return rho0;
    }
    if (!(s > last_s_)) throw ContractError("reset trajectory sample times must be strictly increasing");

    return absorb_path(s, std::span<const Mat2>(&rho0, 1));
}

Mat2 ResetAccumulator::absorb_path(double s, std::span<const Mat2> path) {
    if (!started_) throw ContractError("reset trajectory must start with a single sample at elapsed time 0");
    if (path.empty()) throw ContractError("empty reset path");
    if (!(s > last_s_)) throw ContractError("reset trajectory sample times must be strictly increasing");

    if (rate_ > 0.0) {
        // r * int_{s0}^{s0+ds} e^{-r s'} rho(s') ds' = e^{-r s0} * [wl rho(s0) + wr rho(s0+ds)]
        const double ds = (s - last_s_) / static_cast<double>(path.size());
        const EndpointWeights w = exponential_trapezoid(rate_ * ds);
        const double decay = std::exp(-rate_ * ds);
        double weight = last_weight_;
        const Mat2* prev = &last_rho_;
        for (const Mat2& rho : path) {
            integral_ += weight * (w.left * *prev + w.right * rho);
            weight *= decay;
            prev = &rho;
        }
    }
    return finish(s, path.back());
}

Mat2 ResetAccumulator::absorb_states(double s, std::span<const Spinor> states) {
    if (!started_) throw ContractError("reset trajectory must start with a single sample at elapsed time 0");
    if (states.empty()) throw ContractError("empty reset path");
    if (!(s > last_s_)) throw ContractError("reset trajectory sample times must be strictly increasing");

    if (rate_ > 0.0) {
        // Hermitian unit-trace projectors: diagonal, real and imaginary parts of the 01 entry.
        const double ds = (s - last_s_) / static_cast<double>(states.size());
        const EndpointWeights w = exponential_trapezoid(rate_ * ds);
        const double decay = std::exp(-rate_ * ds);
        double weight = last_weight_;
        double p00 = last_rho_.a[0].real(), p11 = last_rho_.a[3].real();
        double pre = last_rho_.a[1].real(), pim = last_rho_.a[1].imag();
        double s00 = 0.0, s11 = 0.0, sre = 0.0, sim = 0.0;
        for (const Spinor& psi : states) {
            const double vr = psi.v.real(), vi = psi.v.imag(), ur = psi.u.real(), ui = psi.u.imag();
            const double vv = vr * vr + vi * vi, uu = ur * ur + ui * ui, n = 1.0 / (vv + uu);
            const double c00 = vv * n, c11 = uu * n;
            const double cre = (vr * ur + vi * ui) * n, cim = (vi * ur - vr * ui) * n;
            const double wl = weight * w.left, wr = weight * w.right;
            s00 += wl * p00 + wr * c00;
            s11 += wl * p11 + wr * c11;
            sre += wl * pre + wr * cre;
            sim += wl * pim + wr * cim;
            p00 = c00;
            p11 = c11;
            pre = cre;
            pim = cim;
            weight *= decay;
        }
        integral_.a[0] += Complex(s00, 0.0);
        integral_.a[1] += Complex(sre, sim);
        integral_.a[2] += Complex(sre, -sim);
        integral_.a[3] += Complex(s11, 0.0);
    }
    return finish(s, normalized_projector(states.back()));
}

Mat2 ResetAccumulator::finish(double s, const Mat2& rho0) {
    const double weight = std::exp(-rate_ * s);
    last_s_ = s;
    last_weight_ = weight;
    last_rho_ = rho0;

    Mat2 out = integral_ + weight * rho0;
    const double tr = out.trace().real();
    const double drift = std::abs(tr - 1.0);
    max_drift_ = std::max(max_drift_, drift);
    if (drift > kTraceDriftLimit) {
        out *= 1.0 / tr;
        ++renormalized_;
    }
    return out;
}

std::vector<TimedDensity> reset_average_stream(std::span<const TimedDensity> trajectory, double rate) {
    ResetConfig{rate}.validate();
    ResetAccumulator acc(rate);
    std::vector<TimedDensity> out;
    out.reserve(trajectory.size());
    for (const auto& sample : trajectory) {
        out.push_back({sample.s, {acc.absorb(sample.s, sample.rho.rho), sample.rho.basis}});
    }
    return out;
}

Mat2 normalized_projector(const Spinor& psi) {
    Mat2 rho = Mat2::projector(psi);
    const double n = 1.0 / (rho.a[0].real() + rho.a[3].real());
    for (auto& x : rho.a) x *= n;
    return rho;
}

std::vector<Mat2> reset_averaged_branch(const Spinor& initial, const ModeIndex& mode, const BranchField& branch,
                                        const RampProtocol& ramp, const SampleGrid& grid, double rate,
                                        const IntegratorOptions& options) {
    if (grid.size() == 0) throw ContractError("empty sample grid");
    ResetAccumulator acc(rate);
    BranchPropagator prop(mode.k, branch, ramp, options, initial, grid.t[0]);
    std::vector<Mat2> out;
    out.reserve(grid.size());
    out.push_back(acc.absorb(0.0, normalized_projector(initial)));
    std::vector<Spinor> states;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        prop.advance(grid.t[j], substeps_for_interval(grid, j, mode.k, branch.delta, options), states);
        out.push_back(acc.absorb_states(grid.t[j] - grid.t[0], states));
    }
    return out;
}

double reset_purity(const ModeDensityMatrix& rho) {
    return (rho.rho * rho.rho).trace().real();
}

} // namespace qrdyn
