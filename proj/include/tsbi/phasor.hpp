#pragma once

#include <cmath>

namespace tsbi {

/// Complex electrical quantity in rectangular coordinates.
///
/// Templated on the scalar so the same residual code runs on plain doubles
/// and on forward-mode dual numbers when the Jacobian is assembled.
template <class T>
struct BasicPhasor {
    T re{};
    T im{};

    constexpr BasicPhasor() = default;
    constexpr BasicPhasor(T r, T i) : re(r), im(i) {}

    template <class U>
    static BasicPhasor from(const BasicPhasor<U>& other) {
        return {T(other.re), T(other.im)};
    }

    BasicPhasor& operator+=(const BasicPhasor& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    BasicPhasor& operator-=(const BasicPhasor& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }

    friend BasicPhasor operator+(BasicPhasor a, const BasicPhasor& b) { return a += b; }
    friend BasicPhasor operator-(BasicPhasor a, const BasicPhasor& b) { return a -= b; }
    friend BasicPhasor operator-(const BasicPhasor& a) { return {-a.re, -a.im}; }
    friend BasicPhasor operator*(const BasicPhasor& a, const BasicPhasor& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend BasicPhasor operator*(const BasicPhasor& a, const T& s) { return {a.re * s, a.im * s}; }
    friend BasicPhasor operator*(const T& s, const BasicPhasor& a) { return {a.re * s, a.im * s}; }

    friend bool operator==(const BasicPhasor&, const BasicPhasor&) = default;
};

using Phasor = BasicPhasor<double>;

template <class T>
BasicPhasor<T> conj(const BasicPhasor<T>& p) {
    return {p.re, -p.im};
}

/// re^2 + im^2
template <class T>
T norm2(const BasicPhasor<T>& p) {
    return p.re * p.re + p.im * p.im;
}

/// Real part of a * conj(b): the active power when a is a voltage and b a current.
template <class T>
T dot(const BasicPhasor<T>& a, const BasicPhasor<T>& b) {
    return a.re * b.re + a.im * b.im;
}

/// Imag part of a * conj(b): the reactive power when a is a voltage and b a current.
template <class T>
T cross(const BasicPhasor<T>& a, const BasicPhasor<T>& b) {
    return a.im * b.re - a.re * b.im;
}

inline double magnitude(const Phasor& p) { return std::hypot(p.re, p.im); }

inline bool is_finite(const Phasor& p) { return std::isfinite(p.re) && std::isfinite(p.im); }

inline Phasor from_polar(double mag, double angle_rad) {
    return {mag * std::cos(angle_rad), mag * std::sin(angle_rad)};
}

}  // namespace tsbi
