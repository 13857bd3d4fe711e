#pragma once

// Per-momentum-mode dynamics of the driven transverse-field Ising chain.
//
// After the Jordan-Wigner and Fourier transforms the chain splits into N/2
// independent two-level problems, one per wave number k = (2m-1)pi/N. The
// central qubits shift the transverse field by a branch value epsilon, so each
// mode is evolved twice (epsilon = +delta and -delta) from a common ground
// state.

#include "qrdyn/linalg2.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace qrdyn {

// Linear drive h(t) = t / tau between h_i and h_f.
struct RampProtocol {
    double h_i = -5.0;
    double h_f = 5.0;
    double tau = 1.0;

    double field(double t) const { return t / tau; }
    double time_at(double h) const { return h * tau; }
    double t_i() const { return time_at(h_i); }
    double t_f() const { return time_at(h_f); }

    // Throws ConfigError unless tau > 0 and h_i < h_f.
    void validate() const;
};

struct ModeIndex {
    int n_spins = 2;
    int m = 1;
    double k = 0.0;
};

// Throws ConfigError for odd or nonpositive N. Modes are ordered by ascending k.
std::vector<ModeIndex> momentum_grid(int n_spins);

// Field offset of one qubit-pair sector: +delta, -delta or 0.
struct BranchField {
    double epsilon = 0.0;
    double delta = 0.0;

    static BranchField plus(double delta) { return {delta, delta}; }
    static BranchField minus(double delta) { return {-delta, delta}; }
    static BranchField neutral(double delta = 0.0) { return {0.0, delta}; }
};

// Bloch components of the mode Hamiltonian h_z sigma_z + h_x sigma_x.
struct BlochField {
    double hz = 0.0;
    double hx = 0.0;

    double energy() const { return std::hypot(hz, hx); }
};

BlochField bloch_field(double k, double h, const BranchField& branch);

// H = h_z sigma_z + h_x sigma_x with h_z = h + epsilon - cos k, h_x = sin k.
// Eigenvalues are -E and +E.
Mat2 mode_hamiltonian(double k, double h, const BranchField& branch);

// Instantaneous eigenvectors, gauge fixed: the component of largest modulus is
// real and positive (the first one on a tie).
struct EigenPair {
    Spinor ground;
    Spinor excited;
};

EigenPair instantaneous_eigenbasis(double k, double h, const BranchField& branch);
Spinor ground_state_spinor(double k, double h, const BranchField& branch);

// Applies the gauge rule in place; exposed for tests.
Spinor fix_gauge(Spinor s);

enum class BasisTag { Fixed, InstantaneousPlus, InstantaneousMinus, InstantaneousNeutral };

struct ModeDensityMatrix {
    Mat2 rho = Mat2::identity() * 0.5;
    BasisTag basis = BasisTag::Fixed;

    static ModeDensityMatrix pure(const Spinor& s, BasisTag basis = BasisTag::Fixed) {
        return {Mat2::projector(s), basis};
    }
};

// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (-1e-10);
// throws NumericalError describing the first violation.
void validate_density(const ModeDensityMatrix& rho);

// rho^(d)_ij = <b_i| rho |b_j> with b_1 = ground, b_2 = excited.
// Throws ContractError when the basis is not orthonormal to 1e-10.
ModeDensityMatrix project_to_instantaneous(const ModeDensityMatrix& rho, const EigenPair& basis, BasisTag tag);

struct IntegratorOptions {
    // Multiplies the Bloch matrix in the Schrodinger equation. 2 is the
    // quasiparticle scale of sigma^x sigma^x + h sigma^z; 1 integrates the
    // bare 2x2 Bloch matrix.
    double energy_scale = 2.0;
    // Upper bound on dt * max_t ||energy_scale * H||.
    double step_safety = 0.008;
    // Norm drift beyond this aborts the integration.
    double norm_tolerance = 1e-6;
};

// Output sampling: n_samples equal steps in h from h_i to h_f (n_samples + 1
// points, both endpoints included).
struct SampleGrid {
    std::vector<double> h;
    std::vector<double> t;

    static SampleGrid uniform_in_field(const RampProtocol& ramp, int n_samples);
    std::size_t size() const { return t.size(); }
};

// Bound on ||H|| for any mode and either branch while h stays in [h_a, h_b].
double hamiltonian_norm_bound(double h_a, double h_b, double delta);
double max_hamiltonian_norm(const RampProtocol& ramp, double delta);

// Number of RK4 substeps inside one sample interval of length dt_sample.
int substeps_for(double dt_sample, double norm_bound, const IntegratorOptions& options);
// Bound on ||H_k|| for one mode and either branch while h stays in [h_a, h_b],
// floored at 1.
double mode_norm_bound(double k, double h_a, double h_b, double delta);
// Substeps for the interval between grid samples j-1 and j, from the bound over
// all modes or from the bound of mode k.
int substeps_for_interval(const SampleGrid& grid, std::size_t j, double delta, const IntegratorOptions& options);
int substeps_for_interval(const SampleGrid& grid, std::size_t j, double k, double delta,
                          const IntegratorOptions& options);

// Fixed-step RK4 integrator of i d/dt psi = s H(t) psi for one (mode, branch).
// Advances sample to sample; the substep count per interval is chosen by the
// caller so that both branches of a mode share the same grid.
class BranchPropagator {
public:
    BranchPropagator(double k, const BranchField& branch, const RampProtocol& ramp, const IntegratorOptions& options,
                     Spinor initial, double t_start);

    // Integrates to t_next in n_sub equal RK4 steps. Throws IntegrationError
    // on non-finite amplitudes or norm drift beyond options.norm_tolerance.
    const Spinor& advance(double t_next, int n_sub);
    // Same, and stores the state after every substep in `path` (n_sub entries,
    // the last one at t_next).
    const Spinor& advance(double t_next, int n_sub, std::vector<Spinor>& path);

    const Spinor& state() const { return psi_; }
    double time() const { return t_; }

private:
    const Spinor& advance(double t_next, int n_sub, std::vector<Spinor>* path);
    void rk4_step(double t, double dt);

    double k_;
    double cos_k_;
    double sin_k_;
    double epsilon_;
    double inv_tau_;
    double scale_;
    double norm_tolerance_;
    Spinor psi_;
    double t_;
};

// Samples the trajectory on `grid` (grid.t[0] must equal the start time).
// Each sample interval is split into equal RK4 substeps so that
// dt * ||s H_k|| <= step_safety on that interval. The bound includes |delta|, so
// the +delta and -delta branches integrate on identical grids.
std::vector<Spinor> propagate_branch(const Spinor& initial, const ModeIndex& mode, const BranchField& branch,
                                     const RampProtocol& ramp, const SampleGrid& grid,
                                     const IntegratorOptions& options = {});

} // namespace qrdyn
