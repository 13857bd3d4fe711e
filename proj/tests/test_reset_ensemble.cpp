#include "qrdyn/error.hpp"
#include "qrdyn/mode_dynamics.hpp"
#include "qrdyn/reset_ensemble.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qrdyn;

namespace {

// Pure state (1, e^{i w s}) / sqrt 2 precessing at angular frequency w.
Mat2 precessing(double w, double s) {
    const double c = 1.0 / std::sqrt(2.0);
    return Mat2::projector({Complex(c), c * std::polar(1.0, w * s)});
}

// Closed-form reset average of the precessing state: the coherence is
// (1/2) [r (1 - e^{-(r - i w) s}) / (r - i w) + e^{-(r - i w) s}]^*.
Complex precessing_coherence(double r, double w, double s) {
    const Complex z{r, -w};
    const Complex e = std::exp(-z * s);
    const Complex avg = (r > 0.0 ? r * (1.0 - e) / z : Complex{}) + e;
    return 0.5 * std::conj(avg);
}

// Reset-free trajectory of one real mode, in the fixed basis.
std::vector<Mat2> mode_trajectory(const ModeIndex& mode, const RampProtocol& ramp, const SampleGrid& grid) {
    const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
    std::vector<Mat2> out;
    for (const auto& s : propagate_branch(init, mode, BranchField::plus(0.01), ramp, grid))
        out.push_back(normalized_projector(s));
    return out;
}

ModeIndex mode_of(int n, int m) { return {n, m, (2 * m - 1) * std::numbers::pi / n}; }

} // namespace

TEST_CASE("rate zero returns the reset-free trajectory unchanged") {
    ResetAccumulator acc(0.0);
    for (int j = 0; j < 100; ++j) {
        const Mat2 rho = precessing(1.7, 0.1 * j);
        CHECK(acc.absorb(0.1 * j, rho) == rho);
    }
}

TEST_CASE("a constant trajectory is a fixed point for every rate") {
    const Mat2 rho = Mat2::projector({Complex(0.8, 0.0), Complex(0.36, 0.48)});
    for (double r : {1e-6, 0.01, 1.0, 50.0, 1e4}) {
        ResetAccumulator acc(r);
        for (int j = 0; j <= 500; ++j) CHECK(max_abs(acc.absorb(0.37 * j, rho) - rho) <= 1e-12);
    }
}

TEST_CASE("precessing state matches the closed-form average") {
    const double w = 1.3;
    for (double r : {0.05, 0.75, 4.0}) {
        ResetAccumulator acc(r);
        const double ds = 1e-3;
        double worst = 0.0;
        for (int j = 0; j <= 20000; ++j) {
            const double s = j * ds;
            const Mat2 avg = acc.absorb(s, precessing(w, s));
            worst = std::max(worst, std::abs(avg(0, 1) - precessing_coherence(r, w, s)));
            CHECK(std::abs(avg(0, 0).real() - 0.5) < 1e-12);
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("steady-state purity of the precessing state") {
    // |coherence|^2 -> r^2 / (4 (r^2 + w^2)); with w = sqrt(3) r the purity is 5/8.
    const double r = 1.0, w = std::sqrt(3.0) * r;
    ResetAccumulator acc(r);
    Mat2 last;
    for (int j = 0; j <= 60000; ++j) last = acc.absorb(j * 1e-3, precessing(w, j * 1e-3));
    CHECK(reset_purity({last, BasisTag::Fixed}) == doctest::Approx(5.0 / 8.0).epsilon(1e-6));
}

TEST_CASE("large rate pins the state near its value at the last reset") {
    // rho_r(s) - rho_0(0) = O(w / r) for r >> w.
    const double w = 1.0;
    for (double r : {100.0, 1000.0}) {
        ResetAccumulator acc(r);
        double worst = 0.0;
        for (int j = 0; j <= 4000; ++j) {
            const double s = j * 1e-4 * 100.0 / r * 10.0;
            worst = std::max(worst, max_abs(acc.absorb(s, precessing(w, s)) - precessing(w, 0.0)));
        }
        CHECK(worst <= 2.0 * w / r);
    }
}

TEST_CASE("reset averaging of a real mode keeps valid density matrices") {
    const RampProtocol ramp{-5.0, 5.0, 250.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 2000);
    for (int m : {1, 80, 160, 250}) {
        const auto mode = mode_of(500, m);
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        for (double r : {1e-5, 0.001, 0.1}) {
            ResetAccumulator acc(r);
            BranchPropagator prop(mode.k, BranchField::minus(0.01), ramp, {}, init, grid.t[0]);
            std::vector<Spinor> states;
            std::vector<Mat2> path;
            acc.absorb(0.0, normalized_projector(init));
            for (std::size_t j = 1; j < grid.size(); ++j) {
                prop.advance(grid.t[j], substeps_for_interval(grid, j, mode.k, 0.01, {}), states);
                path.clear();
                for (const auto& s : states) path.push_back(normalized_projector(s));
                const Mat2 rho = acc.absorb_path(grid.t[j] - grid.t[0], path);
                CHECK(hermiticity_defect(rho) <= 1e-12);
                CHECK(hermitian_eigenvalues(rho)[0] >= -1e-10);
            }
            CHECK(acc.max_trace_drift() <= 1e-10);
            CHECK(acc.renormalized_samples() == 0);
        }
    }
}

TEST_CASE("average is Lipschitz in the rate") {
    const RampProtocol ramp{-5.0, 5.0, 10.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 800);
    const auto traj = mode_trajectory(mode_of(100, 20), ramp, grid);
    const double r = 0.05, dr = 1e-6;
    ResetAccumulator a(r), b(r + dr);
    double worst_ratio = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double s = grid.t[j] - grid.t[0];
        const double diff = max_abs(a.absorb(s, traj[j]) - b.absorb(s, traj[j]));
        if (s > 0) worst_ratio = std::max(worst_ratio, diff / (dr * s));
    }
    // Each of the three terms of d rho_r / dr is bounded by s for trace-one inputs.
    CHECK(worst_ratio <= 3.0);
}

TEST_CASE("doubling the sample density barely moves the average") {
    const RampProtocol ramp{-5.0, 5.0, 250.0};
    const auto coarse = SampleGrid::uniform_in_field(ramp, 2000);
    const auto fine = SampleGrid::uniform_in_field(ramp, 4000);
    for (int m : {1, 125, 250}) {
        const auto mode = mode_of(500, m);
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        for (double r : {0.001, 0.004}) {
            const auto rc = reset_averaged_branch(init, mode, BranchField::plus(0.01), ramp, coarse, r);
            const auto rf = reset_averaged_branch(init, mode, BranchField::plus(0.01), ramp, fine, r);
            double worst = 0.0;
            for (std::size_t j = 0; j < coarse.size(); ++j) worst = std::max(worst, max_abs(rc[j] - rf[2 * j]));
            CAPTURE(m);
            CAPTURE(r);
            CHECK(worst < 1e-8);
        }
    }
}

TEST_CASE("sample-resolved and substep-resolved averages agree on a smooth trajectory") {
    // A slowly precessing state is resolved by the samples alone.
    const double w = 0.01, r = 0.02;
    ResetAccumulator coarse(r), fine(r);
    coarse.absorb(0.0, precessing(w, 0.0));
    fine.absorb(0.0, precessing(w, 0.0));
    std::vector<Mat2> path(10);
    for (int j = 1; j <= 200; ++j) {
        for (int i = 0; i < 10; ++i) path[i] = precessing(w, (j - 1) + (i + 1) / 10.0);
        const Mat2 a = coarse.absorb(j, precessing(w, j));
        const Mat2 b = fine.absorb_path(j, path);
        CHECK(max_abs(a - b) < 1e-5);
        CHECK(std::abs(b(0, 1) - precessing_coherence(r, w, j)) < 1e-7);
    }
    CHECK_THROWS_AS(fine.absorb_path(300.0, {}), ContractError);
}

TEST_CASE("spinor paths give the same average as projector paths") {
    // Unnormalized states with a scale that varies along the path.
    const double w = 3.0, r = 0.7;
    const Spinor start{Complex(2.0), Complex(0.0, 2.0)};
    ResetAccumulator from_mats(r), from_states(r);
    from_mats.absorb(0.0, normalized_projector(start));
    from_states.absorb(0.0, normalized_projector(start));
    std::vector<Spinor> states(7);
    std::vector<Mat2> mats(7);
    for (int j = 1; j <= 100; ++j) {
        for (int i = 0; i < 7; ++i) {
            const double s = 0.1 * ((j - 1) + (i + 1) / 7.0);
            const double scale = 1.0 + 0.3 * std::sin(5.0 * s);
            states[i] = {Complex(scale * 0.8), scale * 0.6 * std::polar(1.0, w * s)};
            mats[i] = normalized_projector(states[i]);
        }
        const Mat2 a = from_mats.absorb_path(0.1 * j, mats);
        const Mat2 b = from_states.absorb_states(0.1 * j, states);
        CHECK(max_abs(a - b) < 1e-14);
        CHECK(std::abs(b(0, 1) - std::conj(b(1, 0))) == 0.0);
    }
    CHECK_THROWS_AS(from_states.absorb_states(20.0, {}), ContractError);
    CHECK_THROWS_AS(from_states.absorb_states(5.0, states), ContractError);
    ResetAccumulator unstarted(r);
    CHECK_THROWS_AS(unstarted.absorb_states(1.0, states), ContractError);
}

TEST_CASE("batch form agrees with the accumulator and validates input") {
    std::vector<TimedDensity> traj;
    for (int j = 0; j < 50; ++j) traj.push_back({0.2 * j, ModeDensityMatrix::pure({Complex(0.6), Complex(0, 0.8)})});
    traj[10].rho = ModeDensityMatrix::pure({Complex(0.0), Complex(1.0)});
    const auto out = reset_average_stream(traj, 0.3);
    ResetAccumulator acc(0.3);
    for (std::size_t j = 0; j < traj.size(); ++j) CHECK(out[j].rho.rho == acc.absorb(traj[j].s, traj[j].rho.rho));
    CHECK_THROWS_AS(reset_average_stream(traj, -1.0), ConfigError);
    std::swap(traj[3], traj[4]);
    CHECK_THROWS_AS(reset_average_stream(traj, 0.3), ContractError);
}
