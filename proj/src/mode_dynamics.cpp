#include "qrdyn/mode_dynamics.hpp"

#include "qrdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qrdyn {

namespace {

constexpr double kDegenerateGap = 1e-14;

// -i * x
inline Complex times_minus_i(Complex x) { return {x.imag(), -x.real()}; }

} // namespace

void RampProtocol::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive and finite");
    if (!std::isfinite(h_i) || !std::isfinite(h_f)) throw ConfigError("h_i and h_f must be finite");
    if (!(h_i < h_f)) throw ConfigError("h_i must be smaller than h_f");
}

std::vector<ModeIndex> momentum_grid(int n_spins) {
    if (n_spins <= 0 || n_spins % 2 != 0) {
        throw ConfigError("N must be even and positive (got " + std::to_string(n_spins) + ")");
    }
    std::vector<ModeIndex> modes;
    modes.reserve(static_cast<std::size_t>(n_spins / 2));
    for (int m = 1; m <= n_spins / 2; ++m) {
        modes.push_back({n_spins, m, (2.0 * m - 1.0) * std::numbers::pi / n_spins});
    }
    return modes;
}

BlochField bloch_field(double k, double h, const BranchField& branch) {
    return {h + branch.epsilon - std::cos(k), std::sin(k)};
}

Mat2 mode_hamiltonian(double k, double h, const BranchField& branch) {
    const BlochField b = bloch_field(k, h, branch);
    return {{Complex{b.hz}, Complex{b.hx}, Complex{b.hx}, Complex{-b.hz}}};
}

Spinor fix_gauge(Spinor s) {
    const double n = std::sqrt(s.norm_sq());
    if (n == 0.0) return s;
    const double av = std::abs(s.v);
    const double au = std::abs(s.u);
    const Complex pivot = (av >= au - 1e-12 * n) ? s.v : s.u;
    const Complex phase = std::conj(pivot) / (std::abs(pivot) * n);
    s.v *= phase;
    s.u *= phase;
    return s;
}

EigenPair instantaneous_eigenbasis(double k, double h, const BranchField& branch) {
    const BlochField b = bloch_field(k, h, branch);
    const double e = b.energy();
    if (e < kDegenerateGap) {
        std::ostringstream msg;
        msg << "degenerate mode at k=" << k << ", h=" << h << " (E=" << e << ")";
        throw DegeneracyError(msg.str(), k, h);
    }
    // Pick the row of (H -/+ E) that avoids cancellation.
    Spinor g, x;
    if (b.hz >= 0.0) {
        g = {Complex{b.hx}, Complex{-(b.hz + e)}};
        x = {Complex{b.hz + e}, Complex{b.hx}};
    } else {
        g = {Complex{e - b.hz}, Complex{-b.hx}};
        x = {Complex{b.hx}, Complex{e - b.hz}};
    }
    return {fix_gauge(g), fix_gauge(x)};
}

Spinor ground_state_spinor(double k, double h, const BranchField& branch) {
    return instantaneous_eigenbasis(k, h, branch).ground;
}

void validate_density(const ModeDensityMatrix& rho) {
    const double herm = hermiticity_defect(rho.rho);
    if (herm > 1e-12) throw NumericalError("density matrix not Hermitian (defect " + std::to_string(herm) + ")");
    const double tr = rho.rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) throw NumericalError("density matrix trace " + std::to_string(tr) + " != 1");
    const auto ev = hermitian_eigenvalues(rho.rho);
    if (ev[0] < -1e-10) throw NumericalError("density matrix has negative eigenvalue " + std::to_string(ev[0]));
}

ModeDensityMatrix project_to_instantaneous(const ModeDensityMatrix& rho, const EigenPair& basis, BasisTag tag) {
    const Complex gg = inner(basis.ground, basis.ground);
    const Complex ee = inner(basis.excited, basis.excited);
    const Complex ge = inner(basis.ground, basis.excited);
    if (std::abs(gg - 1.0) > 1e-10 || std::abs(ee - 1.0) > 1e-10 || std::abs(ge) > 1e-10) {
        throw ContractError("projection basis is not orthonormal");
    }
    // B has the basis vectors as columns; rho_d = B^dagger rho B.
    Mat2 b{{basis.ground.v, basis.excited.v, basis.ground.u, basis.excited.u}};
    return {b.adjoint() * rho.rho * b, tag};
}

SampleGrid SampleGrid::uniform_in_field(const RampProtocol& ramp, int n_samples) {
    ramp.validate();
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    SampleGrid grid;
    grid.h.resize(static_cast<std::size_t>(n_samples) + 1);
    grid.t.resize(grid.h.size());
    const double dh = (ramp.h_f - ramp.h_i) / n_samples;
    for (int j = 0; j <= n_samples; ++j) {
        const double h = (j == n_samples) ? ramp.h_f : ramp.h_i + j * dh;
        grid.h[static_cast<std::size_t>(j)] = h;
        grid.t[static_cast<std::size_t>(j)] = ramp.time_at(h);
    }
    return grid;
}

double hamiltonian_norm_bound(double h_a, double h_b, double delta) {
    // |h_z| <= max|h| + |delta| + 1 and h_x <= 1.
    const double hz = std::max(std::abs(h_a), std::abs(h_b)) + std::abs(delta) + 1.0;
    return std::hypot(hz, 1.0);
}

double max_hamiltonian_norm(const RampProtocol& ramp, double delta) {
    return hamiltonian_norm_bound(ramp.h_i, ramp.h_f, delta);
}

int substeps_for(double dt_sample, double norm_bound, const IntegratorOptions& options) {
    if (!(options.step_safety > 0.0)) throw ConfigError("step_safety must be positive");
    const double steps = std::ceil(std::abs(dt_sample) * options.energy_scale * norm_bound / options.step_safety);
    return std::max(1, static_cast<int>(steps));
}

double mode_norm_bound(double k, double h_a, double h_b, double delta) {
    const double c = std::cos(k);
    const double hz = std::max(std::abs(h_a - c), std::abs(h_b - c)) + std::abs(delta);
    // The floor keeps steps short where a small gap would allow long ones.
    return std::max(std::hypot(hz, std::sin(k)), 1.0);
}

int substeps_for_interval(const SampleGrid& grid, std::size_t j, double delta, const IntegratorOptions& options) {
    const double bound = hamiltonian_norm_bound(grid.h[j - 1], grid.h[j], delta);
    return substeps_for(grid.t[j] - grid.t[j - 1], bound, options);
}

int substeps_for_interval(const SampleGrid& grid, std::size_t j, double k, double delta,
                          const IntegratorOptions& options) {
    const double bound = mode_norm_bound(k, grid.h[j - 1], grid.h[j], delta);
    return substeps_for(grid.t[j] - grid.t[j - 1], bound, options);
}

BranchPropagator::BranchPropagator(double k, const BranchField& branch, const RampProtocol& ramp,
                                   const IntegratorOptions& options, Spinor initial, double t_start)
    : k_(k), cos_k_(std::cos(k)), sin_k_(std::sin(k)), epsilon_(branch.epsilon), inv_tau_(1.0 / ramp.tau),
      scale_(options.energy_scale), norm_tolerance_(options.norm_tolerance), psi_(initial), t_(t_start) {}

void BranchPropagator::rk4_step(double t, double dt) {
    const double hx = scale_ * sin_k_;
    auto deriv = [&](double time, const Spinor& s) -> Spinor {
        const double hz = scale_ * (time * inv_tau_ + epsilon_ - cos_k_);
        return {times_minus_i(hz * s.v + hx * s.u), times_minus_i(hx * s.v - hz * s.u)};
    };
    const double half = 0.5 * dt;
    const Spinor k1 = deriv(t, psi_);
    const Spinor k2 = deriv(t + half, {psi_.v + half * k1.v, psi_.u + half * k1.u});
    const Spinor k3 = deriv(t + half, {psi_.v + half * k2.v, psi_.u + half * k2.u});
    const Spinor k4 = deriv(t + dt, {psi_.v + dt * k3.v, psi_.u + dt * k3.u});
    const double w = dt / 6.0;
    psi_.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    psi_.u += w * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
}

const Spinor& BranchPropagator::advance(double t_next, int n_sub) { return advance(t_next, n_sub, nullptr); }

const Spinor& BranchPropagator::advance(double t_next, int n_sub, std::vector<Spinor>& path) {
    return advance(t_next, n_sub, &path);
}

const Spinor& BranchPropagator::advance(double t_next, int n_sub, std::vector<Spinor>* path) {
    if (n_sub < 1) throw ContractError("substep count must be positive");
    if (path) path->clear();
    const double t0 = t_;
    if (!(t_next > t0)) {
        if (t_next == t0) return psi_;
        throw IntegrationError("non-increasing sample time", k_, t_next);
    }
    const double dt = (t_next - t0) / n_sub;
    if (t0 + dt == t0) throw IntegrationError("step size underflow", k_, t0);
    for (int i = 0; i < n_sub; ++i) {
        // Evaluate substep starts from t0 to avoid drift from repeated addition.
        rk4_step(t0 + i * dt, dt);
        if (path) path->push_back(psi_);
    }
    t_ = t_next;
    const double n2 = psi_.norm_sq();
    if (!std::isfinite(n2)) throw IntegrationError("non-finite amplitude", k_, t_);
    if (std::abs(n2 - 1.0) > norm_tolerance_) {
        std::ostringstream msg;
        msg << "norm drift " << std::abs(n2 - 1.0) << " exceeds tolerance at k=" << k_ << ", t=" << t_;
        throw IntegrationError(msg.str(), k_, t_);
    }
    return psi_;
}

std::vector<Spinor> propagate_branch(const Spinor& initial, const ModeIndex& mode, const BranchField& branch,
                                     const RampProtocol& ramp, const SampleGrid& grid,
                                     const IntegratorOptions& options) {
    if (grid.size() == 0) throw ContractError("empty sample grid");
    if (std::abs(initial.norm_sq() - 1.0) > 1e-12) throw ContractError("initial spinor is not normalized");
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (!(grid.t[j] > grid.t[j - 1])) throw ContractError("sample times must be strictly increasing");
    }
    BranchPropagator prop(mode.k, branch, ramp, options, initial, grid.t[0]);
    std::vector<Spinor> out;
    out.reserve(grid.size());
    out.push_back(initial);
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const int n_sub = substeps_for_interval(grid, j, mode.k, branch.delta, options);
        out.push_back(prop.advance(grid.t[j], n_sub));
    }
    return out;
}

} // namespace qrdyn
