#include "tsbi/dermodels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsbi/dual.hpp"
#include "tsbi/errors.hpp"

namespace tsbi::der {

void BatteryParams::validate() const {
    if (!(c_batt > 0.0)) throw InputError("battery: c_batt must be positive");
    if (!(r_int >= 0.0)) throw InputError("battery: r_int must be non-negative");
    if (!(0.0 <= soc_min && soc_min < soc_max && soc_max <= 1.0))
        throw InputError("battery: need 0 <= soc_min < soc_max <= 1");
    if (!(v_oc_nom > 0.0)) throw InputError("battery: v_oc_nom must be positive");
    if (!(i_max > 0.0)) throw InputError("battery: i_max must be positive");
}

double open_circuit_voltage(const BatteryParams& p, double soc) {
    if (p.voc_curve) return p.voc_curve->a + p.voc_curve->b * soc;
    return p.v_oc_nom;
}

double battery_terminal_voltage(const BatteryParams& p, double soc, double i_batt) {
    return open_circuit_voltage(p, soc) - i_batt * p.r_int;
}

double soc_update(const BatteryParams& p, double soc_t, double i_t, double i_t1, double dt) {
    if (!(dt > 0.0)) throw InputError("soc_update: dt must be positive");
    constexpr double tol = 1e-9;
    const double next = soc_step(p, soc_t, i_t, i_t1, dt);
    if (next < p.soc_min - tol || next > p.soc_max + tol)
        throw SocBoundViolation("SOC " + std::to_string(next) + " outside [" + std::to_string(p.soc_min) + ", " +
                                std::to_string(p.soc_max) + "]");
    return std::clamp(next, p.soc_min, p.soc_max);
}

double battery_current_for_power(const BatteryParams& p, double soc, double p_dc) {
    const double voc = open_circuit_voltage(p, soc);
    if (p.r_int == 0.0) return p_dc / voc;
    // (voc - r i) i = p  ->  r i^2 - voc i + p = 0, take the root continuous through i = 0
    const double disc = voc * voc - 4.0 * p.r_int * p_dc;
    if (disc < 0.0) throw NumericalError("battery cannot deliver " + std::to_string(p_dc) + " W");
    return 2.0 * p_dc / (voc + std::sqrt(disc));
}

void PvParams::validate() const {
    if (!(i_ph >= 0.0)) throw InputError("pv: i_ph must be non-negative");
    if (!(i_0 > 0.0)) throw InputError("pv: i_0 must be positive");
    if (!(r_s >= 0.0)) throw InputError("pv: r_s must be non-negative");
    if (!(r_sh > 0.0)) throw InputError("pv: r_sh must be positive");
    if (!(n_d > 0.0)) throw InputError("pv: n_d must be positive");
    if (!(n_s >= 1.0)) throw InputError("pv: n_s must be at least 1");
    if (!(v_t > 0.0)) throw InputError("pv: v_t must be positive");
}

PvParams lg400_fixture() {
    PvParams p;
    p.i_ph = 10.475927140487196;
    p.i_0 = 3.1188640287401483e-10;
    p.r_s = 0.2662658444586655;
    p.r_sh = 470.34549427465737;
    p.n_d = 1.1;
    p.n_s = 72.0;
    p.v_t = 0.025693;
    return p;
}

namespace {

// Root of a monotonically increasing scalar function on [lo, hi] with
// f(lo) <= 0 <= f(hi). Newton steps are kept when they stay inside the
// bracket and shrink |f|; bisection otherwise.
template <class F>
double safeguarded_root(F&& f, double lo, double hi, double ftol, int max_iter = 200) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const Dual<1> fx = f(Dual<1>::variable(x, 0));
        if (std::abs(fx.v) < ftol) return x;
        if (fx.v > 0.0)
            hi = x;
        else
            lo = x;
        double next = fx.d[0] != 0.0 ? x - fx.v / fx.d[0] : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    const double fx = f(Dual<1>(x)).v;
    if (std::abs(fx) < ftol) return x;
    throw NumericalError("root solve did not converge (|f| = " + std::to_string(std::abs(fx)) + ")");
}

}  // namespace

double pv_open_circuit_voltage(const PvParams& p) {
    p.validate();
    if (p.i_ph == 0.0) return 0.0;
    // F(v, 0) = i_0 (exp(v/vth) - 1) + v/r_sh - i_ph, increasing in v
    auto f = [&](Dual<1> v) { return pv_residual(p, v, Dual<1>(0.0)); };
    double hi = p.v_th();
    while (f(Dual<1>(hi)).v < 0.0) hi *= 2.0;
    return safeguarded_root(f, 0.0, hi, 1e-13 * std::max(1.0, p.i_ph));
}

double pv_current(const PvParams& p, double v_pv) {
    p.validate();
    const double voc = pv_open_circuit_voltage(p);
    if (!(v_pv >= 0.0) || v_pv > voc * (1.0 + 1e-9) + 1e-12)
        throw InputError("pv_current: voltage " + std::to_string(v_pv) + " outside [0, Voc=" +
                         std::to_string(voc) + "]");
    auto f = [&](Dual<1> i) { return pv_residual(p, Dual<1>(v_pv), i); };
    double lo = -1.0 - v_pv / p.r_sh;
    double hi = p.i_ph + 1.0;
    for (int k = 0; k < 60 && f(Dual<1>(lo)).v > 0.0; ++k) lo *= 2.0;
    for (int k = 0; k < 60 && f(Dual<1>(hi)).v < 0.0; ++k) hi = 2.0 * hi + 1.0;
    if (f(Dual<1>(lo)).v > 0.0 || f(Dual<1>(hi)).v < 0.0)
        throw NumericalError("pv_current: root not bracketable, inconsistent parameters");
    return safeguarded_root(f, lo, hi, 1e-11);
}

MppPoint sweep_mpp(const PvParams& p, int points) {
    const double voc = pv_open_circuit_voltage(p);
    MppPoint best;
    for (int k = 0; k < points; ++k) {
        const double v = points > 1 ? voc * k / (points - 1) : 0.0;
        const double i = pv_current(p, v);
        if (v * i > best.p_mp) best = {v, i, v * i};
    }
    return best;
}

MppSolve solve_mpp(const PvParams& p, int max_iter) {
    p.validate();
    MppSolve out;
    if (p.i_ph == 0.0) {
        out.converged = true;
        return out;
    }
    const double voc = pv_open_circuit_voltage(p);
    MppPoint start = sweep_mpp(p, 50);
    if (start.p_mp <= 0.0) start = {0.8 * voc, pv_current(p, 0.8 * voc), 0.0};
    double v = start.v_mp;
    double i = start.i_mp;

    using D = Dual<2>;
    auto equations = [&](const D& vv, const D& ii) {
        const D vd = vv + ii * p.r_s;
        const D chi = guarded_exp(vd / p.v_th());
        const double vth = p.v_th();
        const D f1 = pv_residual(p, vv, ii);
        const D f2 = ii - vv * (p.i_0 * p.r_sh * chi + vth) /
                              (p.i_0 * p.r_s * p.r_sh * chi + vth * (p.r_s + p.r_sh));
        return std::pair{f1, f2};
    };

    for (int it = 0; it <= max_iter; ++it) {
        auto [f1, f2] = equations(D::variable(v, 0), D::variable(i, 1));
        out.residual = std::max(std::abs(f1.v), std::abs(f2.v));
        out.iterations = it;
        if (out.residual < 1e-11 * std::max(1.0, p.i_ph)) {
            out.converged = true;
            break;
        }
        if (it == max_iter) break;
        const double det = f1.d[0] * f2.d[1] - f1.d[1] * f2.d[0];
        if (det == 0.0 || !std::isfinite(det)) break;
        double dv = -(f1.v * f2.d[1] - f2.v * f1.d[1]) / det;
        double di = -(f1.d[0] * f2.v - f2.d[0] * f1.v) / det;
        // keep the voltage inside (0, Voc)
        double t = 1.0;
        while (t > 1e-6 && !(v + t * dv > 0.0 && v + t * dv < voc)) t *= 0.5;
        v += t * dv;
        i += t * di;
    }
    out.point = {v, i, v * i};
    return out;
}

}  // namespace tsbi::der
