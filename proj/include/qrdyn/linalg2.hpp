#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qrdyn {

using Complex = std::complex<double>;

// Amplitude pair (v, u) of one momentum mode. In the fixed fermion basis v is
// the vacuum amplitude and u the pair amplitude.
struct Spinor {
    Complex v{1.0, 0.0};
    Complex u{0.0, 0.0};

    double norm_sq() const { return std::norm(v) + std::norm(u); }

    friend bool operator==(const Spinor&, const Spinor&) = default;
};

inline Complex inner(const Spinor& a, const Spinor& b) { return std::conj(a.v) * b.v + std::conj(a.u) * b.u; }

// Dense 2x2 complex matrix, row-major.
struct Mat2 {
    std::array<Complex, 4> a{};

    Complex& operator()(int i, int j) { return a[2 * i + j]; }
    const Complex& operator()(int i, int j) const { return a[2 * i + j]; }

    static Mat2 identity() { return {{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}}}; }

    static Mat2 projector(const Spinor& s) {
        // Real arithmetic avoids the NaN-recovery path of generic complex products.
        const double vr = s.v.real(), vi = s.v.imag(), ur = s.u.real(), ui = s.u.imag();
        const Complex vu(vr * ur + vi * ui, vi * ur - vr * ui);
        return {{Complex(vr * vr + vi * vi, 0.0), vu, std::conj(vu), Complex(ur * ur + ui * ui, 0.0)}};
    }

    Complex trace() const { return a[0] + a[3]; }
    Complex det() const { return a[0] * a[3] - a[1] * a[2]; }

    Mat2 adjoint() const { return {{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}}; }

    Mat2& operator+=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat2& operator*=(double s) {
        for (auto& x : a) x *= s;
        return *this;
    }

    friend Mat2 operator+(Mat2 l, const Mat2& r) { return l += r; }
    friend Mat2 operator-(Mat2 l, const Mat2& r) { return l -= r; }
    friend Mat2 operator*(Mat2 l, double s) { return l *= s; }
    friend Mat2 operator*(double s, Mat2 r) { return r *= s; }

    friend Mat2 operator*(const Mat2& l, const Mat2& r) {
        Mat2 o;
        o(0, 0) = l(0, 0) * r(0, 0) + l(0, 1) * r(1, 0);
        o(0, 1) = l(0, 0) * r(0, 1) + l(0, 1) * r(1, 1);
        o(1, 0) = l(1, 0) * r(0, 0) + l(1, 1) * r(1, 0);
        o(1, 1) = l(1, 0) * r(0, 1) + l(1, 1) * r(1, 1);
        return o;
    }

    friend bool operator==(const Mat2&, const Mat2&) = default;
};

// Largest elementwise modulus.
inline double max_abs(const Mat2& m) {
    double r = 0.0;
    for (const auto& x : m.a) r = std::max(r, std::abs(x));
    return r;
}

inline double hermiticity_defect(const Mat2& m) { return max_abs(m - m.adjoint()); }

// Eigenvalues of the Hermitian part, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
    const double p = 0.5 * (m(0, 0).real() + m(1, 1).real());
    const double q = 0.5 * (m(0, 0).real() - m(1, 1).real());
    const Complex off = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
    const double rad = std::hypot(q, std::abs(off));
    return {p - rad, p + rad};
}

} // namespace qrdyn
