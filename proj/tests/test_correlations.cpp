#include "qrdyn/correlations.hpp"
#include "qrdyn/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

using namespace qrdyn;

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Cyclic Jacobi eigenvalues of a real symmetric 4x4 matrix, ascending.
std::array<double, 4> jacobi_eigenvalues(Mat4 a) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, 4> ev{a[0][0], a[1][1], a[2][2], a[3][3]};
    std::sort(ev.begin(), ev.end());
    return ev;
}

double xlog2x(double x) { return x <= 0.0 ? 0.0 : x * std::log2(x); }

// Entropy form of the discord with eigenvalues from the generic solver.
double naive_discord(double a, double d_abs) {
    const auto ev = jacobi_eigenvalues(reduced_two_qubit_state(a, DecoherenceFactor::from_modulus(d_abs)).matrix());
    const double f = 1.0 - xlog2x((1.0 + a) / 2.0) - xlog2x((1.0 - a) / 2.0);
    double s = f;
    for (double l : ev) s += xlog2x(l);
    return s;
}

// X-state concurrence from the matrix elements.
double x_state_concurrence(const Mat4& m) {
    return 2.0 * std::max({0.0, std::abs(m[0][3]) - std::sqrt(m[1][1] * m[2][2]),
                           std::abs(m[1][2]) - std::sqrt(m[0][0] * m[3][3])});
}

DecoherenceFactor factor(double d_abs) { return DecoherenceFactor::from_modulus(d_abs); }

} // namespace

TEST_CASE("pure overlap is symmetric and gauge invariant") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        Spinor p{Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
        Spinor q{Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
        const double np = std::sqrt(p.norm_sq()), nq = std::sqrt(q.norm_sq());
        p = {p.v / np, p.u / np};
        q = {q.v / nq, q.u / nq};
        const double f = mode_overlap_pure(p, q).value;
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(std::abs(f - mode_overlap_pure(q, p).value) < 1e-15);
        const Complex ph = std::polar(1.0, 0.77);
        CHECK(std::abs(f - mode_overlap_pure({p.v * ph, p.u * ph}, q).value) < 1e-14);
        const double mixed =
            mode_overlap_mixed(ModeDensityMatrix::pure(p), ModeDensityMatrix::pure(q)).value;
        CHECK(std::abs(f - mixed) < 1e-14);
    }
    CHECK(mode_overlap_pure({Complex(1), Complex(0)}, {Complex(0), Complex(1)}).value == 0.0);
}

TEST_CASE("overlap clamping") {
    CHECK(clamp_overlap(1.0 + 5e-11).value == 1.0);
    CHECK(clamp_overlap(-5e-11).value == 0.0);
    CHECK(clamp_overlap(0.3).value == 0.3);
    CHECK_THROWS_AS(clamp_overlap(1.0 + 1e-8), NumericalError);
    CHECK_THROWS_AS(clamp_overlap(-1e-8), NumericalError);
}

TEST_CASE("decoherence factor sums logarithms and survives underflow") {
    std::vector<ModeOverlap> f(250, ModeOverlap{1e-5});
    const auto d = decoherence_factor(f);
    CHECK(d.log_modulus == doctest::Approx(250 * std::log(1e-5)));
    CHECK(d.modulus() == 0.0);
    const std::vector<ModeOverlap> ones(10, ModeOverlap{1.0});
    CHECK(decoherence_factor(ones).log_modulus == 0.0);
    const std::vector<ModeOverlap> zero{{0.5}, {0.0}};
    CHECK(decoherence_factor(zero).modulus() == 0.0);
}

TEST_CASE("slow-ramp approximation") {
    // exp(-500 * 1e-4 / (4 * 4 * 3)) at h = -2.
    CHECK(decoherence_paramagnetic_approx(500, 0.01, -2.0) == doctest::Approx(0.998959).epsilon(1e-6));
    for (double h : {-4.5, -3.0, -1.5, 2.0}) {
        CHECK(decoherence_paramagnetic_approx(500, 0.01, h) ==
              doctest::Approx(std::exp(-500 * 1e-4 / (4 * h * h * (h * h - 1)))).epsilon(1e-14));
    }
    CHECK_THROWS_AS(decoherence_paramagnetic_approx(500, 0.01, 0.5), DomainError);
    CHECK_THROWS_AS(decoherence_paramagnetic_approx(500, 0.01, -1.0), DomainError);
}

TEST_CASE("closed-form eigenvalues agree with a generic eigensolver") {
    for (double a : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0}) {
        for (double d : {0.0, 1e-8, 0.1, 0.5, 0.97, 1.0}) {
            const auto st = reduced_two_qubit_state(a, factor(d));
            auto closed = st.eigenvalues();
            std::sort(closed.begin(), closed.end());
            const auto ref = jacobi_eigenvalues(st.matrix());
            for (int i = 0; i < 4; ++i) CHECK(std::abs(closed[i] - ref[i]) < 1e-12);
            double tr = 0.0;
            for (int i = 0; i < 4; ++i) tr += st.matrix()[i][i];
            CHECK(tr == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("concurrence agrees with the X-state formula") {
    for (double a = 0.0; a <= 1.0; a += 0.05) {
        for (double d = 0.0; d <= 1.0; d += 0.01) {
            const double c = concurrence(a, factor(d));
            CHECK(std::abs(c - x_state_concurrence(reduced_two_qubit_state(a, factor(d)).matrix())) < 1e-12);
        }
    }
    CHECK(concurrence(0.9, factor(1.0)) == doctest::Approx(0.85));
}

TEST_CASE("discord agrees with the entropy form") {
    for (double a : {0.05, 0.2, 0.4, 0.5, 0.9, 0.999}) {
        for (double d : {1e-4, 1e-2, 0.1, 0.3, 0.7, 1.0}) {
            CAPTURE(a);
            CAPTURE(d);
            CHECK(std::abs(quantum_discord(a, factor(d)) - naive_discord(a, d)) < 1e-10);
        }
    }
    CHECK(quantum_discord(0.9, factor(1.0)) == doctest::Approx(0.78321).epsilon(1e-5));
    CHECK(quantum_discord(0.9, factor(0.0)) == 0.0);
    CHECK(quantum_discord(0.9, DecoherenceFactor{-1e4}) == 0.0);
}

TEST_CASE("discord is smooth and positive where the entropy form loses precision") {
    // QD ~ (1+a)/4 x^2 / ln 2 with x = 2 a sqrt|D| / (1+a) for small |D|.
    const double a = 0.9;
    for (double logd : {-30.0, -60.0, -200.0}) {
        const double x = 2 * a * std::exp(logd / 2) / (1 + a);
        const double lead = (1 + a) / 4 * x * x / std::log(2.0);
        CHECK(quantum_discord(a, DecoherenceFactor{logd}) == doctest::Approx(lead).epsilon(1e-10));
    }
}

TEST_CASE("correlations are nondecreasing in |D|") {
    for (double a : {0.4, 0.5, 0.9}) {
        double c_prev = -1.0, q_prev = -1.0;
        for (int i = 0; i <= 10000; ++i) {
            const double d = i / 10000.0;
            const double c = concurrence(a, factor(d)), q = quantum_discord(a, factor(d));
            CHECK(c >= c_prev);
            CHECK(q >= q_prev - 1e-15);
            c_prev = c;
            q_prev = q;
        }
    }
}

TEST_CASE("discord without entanglement below a = 1/3") {
    for (int i = 1; i <= 1000; ++i) {
        const double d = i / 1000.0;
        CHECK(concurrence(0.2, factor(d)) == 0.0);
        CHECK(quantum_discord(0.2, factor(d)) > 0.0);
    }
}

TEST_CASE("Werner parameter is validated") {
    CHECK_THROWS_AS(validate_werner_parameter(-0.1), ConfigError);
    CHECK_THROWS_AS(validate_werner_parameter(1.1), ConfigError);
    CHECK_THROWS_AS(concurrence(2.0, factor(1.0)), ConfigError);
    CHECK_NOTHROW(validate_werner_parameter(0.0));
    CHECK_NOTHROW(validate_werner_parameter(1.0));
}
