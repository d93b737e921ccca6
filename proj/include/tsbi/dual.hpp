#pragma once

// Forward-mode dual numbers with a fixed number of seed directions.
// Residual blocks are written once as templates and evaluated either on
// double (values) or on Dual<N> (values + exact partials).

#include <array>
#include <cmath>

namespace tsbi {

template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit constant promotion is intended

    static Dual variable(double value, int slot) {
        Dual x(value);
        x.d[slot] = 1.0;
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int k = 0; k < N; ++k) d[k] += o.d[k];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int k = 0; k < N; ++k) d[k] -= o.d[k];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int k = 0; k < N; ++k) d[k] = d[k] * o.v + v * o.d[k];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        for (int k = 0; k < N; ++k) d[k] = (d[k] - v * inv * o.d[k]) * inv;
        v *= inv;
        return *this;
    }

    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
    friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
    friend Dual operator+(Dual a, double b) { a.v += b; return a; }
    friend Dual operator+(double b, Dual a) { a.v += b; return a; }
    friend Dual operator-(Dual a, double b) { a.v -= b; return a; }
    friend Dual operator-(double b, const Dual& a) { return Dual(b) - a; }
    friend Dual operator*(Dual a, double b) {
        a.v *= b;
        for (auto& x : a.d) x *= b;
        return a;
    }
    friend Dual operator*(double b, Dual a) { return a * b; }
    friend Dual operator/(Dual a, double b) { return a * (1.0 / b); }
    friend Dual operator/(double b, const Dual& a) { return Dual(b) / a; }
    friend Dual operator-(Dual a) {
        a.v = -a.v;
        for (auto& x : a.d) x = -x;
        return a;
    }

    friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
    friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
};

template <int N>
Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r(std::sqrt(a.v));
    const double k = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = k * a.d[i];
    return r;
}

template <int N>
Dual<N> exp(const Dual<N>& a) {
    Dual<N> r(std::exp(a.v));
    for (int i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
    return r;
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
    return x.v;
}

}  // namespace tsbi
