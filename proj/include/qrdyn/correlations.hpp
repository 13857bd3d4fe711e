#pragma once

// Decoherence factor, reduced two-qubit state and its correlation measures.

#include "qrdyn/linalg2.hpp"
#include "qrdyn/mode_dynamics.hpp"

#include <array>
#include <cmath>
#include <span>

namespace qrdyn {

// Per-mode overlap F_k, clamped to [0, 1].
struct ModeOverlap {
    double value = 1.0;
};

// |D(t)| kept in the log domain; 250 factors near criticality underflow a
// plain product.
struct DecoherenceFactor {
    double log_modulus = 0.0; // <= 0, may be -inf

    double modulus() const { return std::exp(log_modulus); }
    static DecoherenceFactor from_modulus(double modulus);
};

// Clamps roundoff excursions of F_k; throws NumericalError if F_k leaves
// [-1e-10, 1 + 1e-10].
ModeOverlap clamp_overlap(double raw);

// F_k = |u+^* u- + v+^* v-|^2.
ModeOverlap mode_overlap_pure(const Spinor& plus, const Spinor& minus);

// F_k = r+_11 r-_11 + r+_22 r-_22 + r+_12 r-_21 + r+_21 r-_12. Both matrices
// must be expressed in bases related by the identity map, in which case this is
// tr(rho+ rho-). Imaginary residue above 1e-8 throws NumericalError.
ModeOverlap mode_overlap_mixed(const ModeDensityMatrix& plus, const ModeDensityMatrix& minus);

// Sum of ln F_k in the order given (callers pass ascending k).
DecoherenceFactor decoherence_factor(std::span<const ModeOverlap> overlaps);

// exp[-N delta^2 / (4 h^2 (h^2 - 1))], valid in the paramagnetic phase.
// Throws DomainError for |h| <= 1.
double decoherence_paramagnetic_approx(int n_spins, double delta, double h);

// Werner state after dephasing: X-shaped 4x4 matrix with diagonal
// ((1+a), (1-a), (1-a), (1+a))/4 and corner coherences a*sqrt|D|/2.
class TwoQubitState {
public:
    // Throws ConfigError unless a lies in [0, 1].
    TwoQubitState(double a, const DecoherenceFactor& d);

    double a() const { return a_; }
    double sqrt_modulus() const { return d_; }

    // {(1-a)/4, (1-a)/4, (1+a+2ad)/4, (1+a-2ad)/4}
    std::array<double, 4> eigenvalues() const;
    std::array<std::array<double, 4>, 4> matrix() const;

private:
    double a_;
    double d_;
};

TwoQubitState reduced_two_qubit_state(double a, const DecoherenceFactor& d);

// max[a (sqrt|D| + 1/2) - 1/2, 0]
double concurrence(double a, const DecoherenceFactor& d);

// sum lambda log2 lambda + f(a), with 0 log 0 = 0.
double quantum_discord(double a, const DecoherenceFactor& d);

// Throws ConfigError when a is outside [0, 1].
void validate_werner_parameter(double a);

} // namespace qrdyn
