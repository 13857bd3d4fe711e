#include "qrdyn/error.hpp"
#include "qrdyn/mode_dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qrdyn;

namespace {

// Plain RK4 for i dpsi/dt = sign * s * H(t) psi with its own step control.
Spinor oracle_propagate(Spinor psi, double k, double eps, double tau, double t0, double t1, int steps, double sign,
                        double scale = 2.0) {
    auto rhs = [&](double t, const Spinor& p) {
        const double hz = t / tau + eps - std::cos(k);
        const double hx = std::sin(k);
        const Complex mi{0.0, -sign * scale};
        return Spinor{mi * (hz * p.v + hx * p.u), mi * (hx * p.v - hz * p.u)};
    };
    auto axpy = [](const Spinor& a, double c, const Spinor& b) { return Spinor{a.v + c * b.v, a.u + c * b.u}; };
    const double dt = (t1 - t0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + i * dt;
        const Spinor k1 = rhs(t, psi);
        const Spinor k2 = rhs(t + dt / 2, axpy(psi, dt / 2, k1));
        const Spinor k3 = rhs(t + dt / 2, axpy(psi, dt / 2, k2));
        const Spinor k4 = rhs(t + dt, axpy(psi, dt, k3));
        psi.v += dt / 6 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        psi.u += dt / 6 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    }
    return psi;
}

Spinor apply(const Mat2& m, const Spinor& s) { return {m(0, 0) * s.v + m(0, 1) * s.u, m(1, 0) * s.v + m(1, 1) * s.u}; }

} // namespace

TEST_CASE("momentum grid holds N/2 ascending modes") {
    const auto modes = momentum_grid(500);
    REQUIRE(modes.size() == 250);
    CHECK(modes.front().k == doctest::Approx(std::numbers::pi / 500));
    CHECK(modes.back().k == doctest::Approx(499 * std::numbers::pi / 500));
    for (std::size_t i = 1; i < modes.size(); ++i) CHECK(modes[i].k > modes[i - 1].k);
    CHECK_THROWS_AS(momentum_grid(7), ConfigError);
    CHECK_THROWS_AS(momentum_grid(0), ConfigError);
}

TEST_CASE("ramp validation") {
    CHECK_THROWS_AS((RampProtocol{-5, 5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((RampProtocol{5, -5, 1}.validate()), ConfigError);
    CHECK_NOTHROW((RampProtocol{-5, 5, 1}.validate()));
    const RampProtocol r{-5, 5, 250};
    CHECK(r.t_i() == -1250.0);
    CHECK(r.field(r.t_f()) == 5.0);
}

TEST_CASE("instantaneous eigenbasis is orthonormal, diagonalizes H and is gauge fixed") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> kd(0.01, std::numbers::pi - 0.01), hd(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const double k = kd(rng), h = hd(rng);
        for (const auto& br : {BranchField::plus(0.01), BranchField::minus(0.01), BranchField::neutral()}) {
            const auto e = instantaneous_eigenbasis(k, h, br);
            CHECK(std::abs(inner(e.ground, e.excited)) < 1e-12);
            CHECK(std::abs(e.ground.norm_sq() - 1.0) < 1e-12);
            CHECK(std::abs(e.excited.norm_sq() - 1.0) < 1e-12);
            const Mat2 H = mode_hamiltonian(k, h, br);
            const double E = bloch_field(k, h, br).energy();
            const Spinor hg = apply(H, e.ground), he = apply(H, e.excited);
            CHECK(std::abs(hg.v + E * e.ground.v) + std::abs(hg.u + E * e.ground.u) < 1e-12);
            CHECK(std::abs(he.v - E * e.excited.v) + std::abs(he.u - E * e.excited.u) < 1e-12);
            for (const Spinor& s : {e.ground, e.excited}) {
                const Complex pivot = std::abs(s.v) >= std::abs(s.u) - 1e-12 ? s.v : s.u;
                CHECK(pivot.imag() == 0.0);
                CHECK(pivot.real() > 0.0);
            }
        }
    }
}

TEST_CASE("gauge fixing is idempotent and removes a common phase") {
    const Spinor s{Complex(0.3, 0.4), Complex(-0.2, 0.84)};
    const Spinor f = fix_gauge(s);
    const Spinor rotated = fix_gauge({s.v * std::polar(1.0, 1.1), s.u * std::polar(1.0, 1.1)});
    CHECK(std::abs(f.v - rotated.v) < 1e-14);
    CHECK(std::abs(f.u - rotated.u) < 1e-14);
    const Spinor again = fix_gauge(f);
    CHECK(std::abs(again.v - f.v) < 1e-15);
}

TEST_CASE("degenerate mode throws") {
    CHECK_THROWS_AS(instantaneous_eigenbasis(0.0, 1.0, BranchField::neutral()), DegeneracyError);
}

TEST_CASE("ground state far in the paramagnet is the fermion vacuum") {
    // h_z << 0: the lower eigenvector of h_z sigma_z is (1, 0).
    const Spinor g = ground_state_spinor(1.0, -1e6, BranchField::neutral());
    CHECK(std::norm(g.v) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("propagation agrees with an independent RK4 oracle") {
    const RampProtocol ramp{-5.0, 5.0, 10.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 40);
    for (int m : {1, 7, 13}) {
        const ModeIndex mode{26, m, (2 * m - 1) * std::numbers::pi / 26};
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        const auto psi = propagate_branch(init, mode, BranchField::plus(0.05), ramp, grid);
        const Spinor ref = oracle_propagate(init, mode.k, 0.05, ramp.tau, ramp.t_i(), ramp.t_f(), 1000000, 1.0);
        CHECK(std::abs(psi.back().v - ref.v) < 1e-7);
        CHECK(std::abs(psi.back().u - ref.u) < 1e-7);
    }
}

TEST_CASE("global sign flip of H leaves branch overlaps unchanged") {
    const double tau = 5.0, t0 = -25.0, t1 = 25.0;
    for (double k : {0.2, 1.3, 2.9}) {
        const Spinor init = ground_state_spinor(k, -5.0, BranchField::neutral());
        double f[2];
        int i = 0;
        for (double sign : {1.0, -1.0}) {
            const Spinor p = oracle_propagate(init, k, 0.01, tau, t0, t1, 20000, sign);
            const Spinor q = oracle_propagate(init, k, -0.01, tau, t0, t1, 20000, sign);
            f[i++] = std::norm(inner(p, q));
        }
        CHECK(std::abs(f[0] - f[1]) < 1e-12);
    }
}

TEST_CASE("norm is conserved over the full default ramp") {
    const RampProtocol ramp{-5.0, 5.0, 250.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 2000);
    for (const auto& mode : momentum_grid(500)) {
        if (mode.m % 25 != 1 && mode.m != 250) continue;
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        for (const auto& br : {BranchField::plus(0.01), BranchField::minus(0.01)}) {
            double worst = 0.0;
            for (const auto& s : propagate_branch(init, mode, br, ramp, grid))
                worst = std::max(worst, std::abs(s.norm_sq() - 1.0));
            CHECK(worst < 1e-8);
        }
    }
}

TEST_CASE("evolution operator is unitary") {
    const RampProtocol ramp{-5.0, 5.0, 20.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 100);
    for (const auto& mode : momentum_grid(12)) {
        const auto c0 = propagate_branch({Complex(1), Complex(0)}, mode, BranchField::plus(0.01), ramp, grid);
        const auto c1 = propagate_branch({Complex(0), Complex(1)}, mode, BranchField::plus(0.01), ramp, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Complex det = c0[j].v * c1[j].u - c1[j].v * c0[j].u;
            CHECK(std::abs(std::abs(det) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("branches coincide bitwise when delta is zero") {
    const RampProtocol ramp{-5.0, 5.0, 3.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 200);
    for (const auto& mode : momentum_grid(10)) {
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        CHECK(propagate_branch(init, mode, BranchField::plus(0.0), ramp, grid) ==
              propagate_branch(init, mode, BranchField::minus(0.0), ramp, grid));
    }
}

TEST_CASE("adiabatic limit keeps the instantaneous ground state") {
    const RampProtocol ramp{-5.0, -2.0, 250.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 300);
    double worst = 1.0;
    for (const auto& mode : momentum_grid(500)) {
        if (mode.m % 5 != 1) continue;
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::plus(0.01));
        const auto psi = propagate_branch(init, mode, BranchField::plus(0.01), ramp, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Spinor g = ground_state_spinor(mode.k, grid.h[j], BranchField::plus(0.01));
            worst = std::min(worst, std::norm(inner(g, psi[j])));
        }
    }
    CHECK(worst >= 0.999);
}

TEST_CASE("sudden limit leaves the state frozen") {
    const RampProtocol ramp{-5.0, 5.0, 1e-5};
    const auto grid = SampleGrid::uniform_in_field(ramp, 10);
    for (const auto& mode : momentum_grid(20)) {
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        const auto psi = propagate_branch(init, mode, BranchField::plus(0.01), ramp, grid);
        CHECK(std::norm(inner(init, psi.back())) > 0.999);
    }
}

TEST_CASE("halving the step changes sampled amplitudes by less than 1e-6") {
    const RampProtocol ramp{-5.0, 5.0, 250.0};
    const auto grid = SampleGrid::uniform_in_field(ramp, 2000);
    IntegratorOptions fine;
    fine.step_safety /= 2.0;
    for (int m : {1, 60, 125, 200, 250}) {
        const ModeIndex mode{500, m, (2 * m - 1) * std::numbers::pi / 500};
        const Spinor init = ground_state_spinor(mode.k, ramp.h_i, BranchField::neutral());
        const auto a = propagate_branch(init, mode, BranchField::minus(0.01), ramp, grid);
        const auto b = propagate_branch(init, mode, BranchField::minus(0.01), ramp, grid, fine);
        double worst = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j)
            worst = std::max({worst, std::abs(a[j].v - b[j].v), std::abs(a[j].u - b[j].u)});
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("substep count honours the step bound") {
    IntegratorOptions opt;
    const int n = substeps_for(1.25, 6.0, opt);
    CHECK(1.25 / n * 6.0 * opt.energy_scale <= opt.step_safety * (1 + 1e-12));
    CHECK(mode_norm_bound(0.5, -5, 5, 0.01) >= hamiltonian_norm_bound(-5, 5, 0.01) - 1.0);
    CHECK(mode_norm_bound(0.5, -5, 5, 0.01) <= hamiltonian_norm_bound(-5, 5, 0.01));
    CHECK(mode_norm_bound(0.5, 0.87, 0.88, 0.0) == 1.0);
}

TEST_CASE("projection onto the instantaneous basis matches the amplitude pattern") {
    const double k = 0.9, h = 0.4;
    const auto basis = instantaneous_eigenbasis(k, h, BranchField::plus(0.01));
    const Spinor psi{Complex(0.6, 0.1), Complex(-0.3, std::sqrt(1.0 - 0.37 - 0.09))};
    const auto d = project_to_instantaneous(ModeDensityMatrix::pure(psi), basis, BasisTag::InstantaneousPlus);
    const Complex cg = inner(basis.ground, psi), ce = inner(basis.excited, psi);
    CHECK(std::abs(d.rho(0, 0) - std::norm(cg)) < 1e-12);
    CHECK(std::abs(d.rho(0, 1) - cg * std::conj(ce)) < 1e-12);
    CHECK(std::abs(d.rho(1, 0) - ce * std::conj(cg)) < 1e-12);
    CHECK(std::abs(d.rho(1, 1) - std::norm(ce)) < 1e-12);
    CHECK_NOTHROW(validate_density(d));
    CHECK_THROWS_AS(project_to_instantaneous(ModeDensityMatrix::pure(psi),
                                             {basis.ground, basis.ground}, BasisTag::InstantaneousPlus),
                    ContractError);
}

TEST_CASE("density validation catches each violation") {
    Mat2 m = Mat2::identity() * 0.5;
    CHECK_NOTHROW(validate_density({m, BasisTag::Fixed}));
    Mat2 bad_trace = Mat2::identity() * 0.6;
    CHECK_THROWS_AS(validate_density({bad_trace, BasisTag::Fixed}), NumericalError);
    Mat2 bad_herm = m;
    bad_herm(0, 1) = Complex(0.1, 0.0);
    CHECK_THROWS_AS(validate_density({bad_herm, BasisTag::Fixed}), NumericalError);
    Mat2 negative{{Complex(1.2), Complex(), Complex(), Complex(-0.2)}};
    CHECK_THROWS_AS(validate_density({negative, BasisTag::Fixed}), NumericalError);
}
