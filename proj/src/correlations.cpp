#include "qrdyn/correlations.hpp"

#include "qrdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qrdyn {

DecoherenceFactor DecoherenceFactor::from_modulus(double modulus) {
    if (modulus < 0.0 || modulus > 1.0) throw DomainError("|D| must lie in [0, 1]");
    return {modulus == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(modulus)};
}

ModeOverlap clamp_overlap(double raw) {
    if (!(raw >= -1e-10 && raw <= 1.0 + 1e-10)) {
        std::ostringstream msg;
        msg << "mode overlap " << raw << " outside [0, 1] beyond roundoff";
        throw NumericalError(msg.str());
    }
    return {std::clamp(raw, 0.0, 1.0)};
}

ModeOverlap mode_overlap_pure(const Spinor& plus, const Spinor& minus) {
    return clamp_overlap(std::norm(inner(plus, minus)));
}

ModeOverlap mode_overlap_mixed(const ModeDensityMatrix& plus, const ModeDensityMatrix& minus) {
    const Mat2& p = plus.rho;
    const Mat2& m = minus.rho;
    const Complex f = p(0, 0) * m(0, 0) + p(1, 1) * m(1, 1) + p(0, 1) * m(1, 0) + p(1, 0) * m(0, 1);
    if (std::abs(f.imag()) > 1e-8) {
        throw NumericalError("mode overlap has imaginary residue " + std::to_string(f.imag()));
    }
    return clamp_overlap(f.real());
}

DecoherenceFactor decoherence_factor(std::span<const ModeOverlap> overlaps) {
    double sum = 0.0;
    for (const auto& f : overlaps) {
        if (f.value == 0.0) return {-std::numeric_limits<double>::infinity()};
        sum += std::log(f.value);
    }
    return {sum};
}

double decoherence_paramagnetic_approx(int n_spins, double delta, double h) {
    if (!(std::abs(h) > 1.0)) throw DomainError("paramagnetic approximation requires |h| > 1");
    const double h2 = h * h;
    return std::exp(-n_spins * delta * delta / (4.0 * h2 * (h2 - 1.0)));
}

void validate_werner_parameter(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("a must lie in [0,1]");
}

TwoQubitState::TwoQubitState(double a, const DecoherenceFactor& d) : a_(a), d_(std::sqrt(d.modulus())) {
    validate_werner_parameter(a);
}

std::array<double, 4> TwoQubitState::eigenvalues() const {
    // The corner block [[1+a, 2ad], [2ad, 1+a]]/4 diagonalizes in closed form.
    return {(1.0 - a_) / 4.0, (1.0 - a_) / 4.0, (1.0 + a_ + 2.0 * a_ * d_) / 4.0, (1.0 + a_ - 2.0 * a_ * d_) / 4.0};
}

std::array<std::array<double, 4>, 4> TwoQubitState::matrix() const {
    std::array<std::array<double, 4>, 4> m{};
    m[0][0] = m[3][3] = (1.0 + a_) / 4.0;
    m[1][1] = m[2][2] = (1.0 - a_) / 4.0;
    m[0][3] = m[3][0] = a_ * d_ / 2.0;
    return m;
}

TwoQubitState reduced_two_qubit_state(double a, const DecoherenceFactor& d) { return TwoQubitState(a, d); }

double concurrence(double a, const DecoherenceFactor& d) {
    validate_werner_parameter(a);
    return std::max(a * (std::sqrt(d.modulus()) + 0.5) - 0.5, 0.0);
}

double quantum_discord(double a, const DecoherenceFactor& d) {
    validate_werner_parameter(a);
    // The a-only entropy terms cancel against the two (1-a)/4 eigenvalues, leaving
    // c[(1+x)log2(1+x) + (1-x)log2(1-x)] with c = (1+a)/4 and x = 2a sqrt|D| / (1+a).
    // The series branch avoids cancellation when |D| is tiny.
    const double x = std::min(2.0 * a * std::exp(0.5 * d.log_modulus) / (1.0 + a), 1.0);
    if (x == 0.0) return 0.0;
    double g;
    if (x < 1e-2) {
        const double x2 = x * x;
        g = x2 * (1.0 + x2 * (1.0 / 6.0 + x2 * (1.0 / 15.0 + x2 * (1.0 / 28.0 + x2 / 45.0))));
    } else {
        g = (1.0 + x) * std::log1p(x) + (x < 1.0 ? (1.0 - x) * std::log1p(-x) : 0.0);
    }
    return std::max((1.0 + a) / 4.0 * g / std::numbers::ln2, 0.0);
}

} // namespace qrdyn
