#pragma once

// Two-stage bidirectional inverter equivalent circuit.
//
// T1 (DER side) -> FSC (four-switch buck-boost, duty d) -> DC link at fixed v_dc
// -> SSC (H-bridge, modulation phasor m) -> LCL filter -> T2 (grid side).
//
// Source placement inside each stage:
//   FSC: shunt switching-loss source at T1, series conduction drop, ideal
//        transformer of gain d/(1-d), series conduction drop, shunt source at DC.
//   SSC: shunt switching + reverse-recovery source on the DC side, ideal
//        modulation transformer m/sqrt(2), series conduction source on the AC side.
//
// Sign convention: i_t1 > 0 flows from the DER into the FSC, i_dc > 0 from the
// FSC into the SSC, i_t2 > 0 is injected into the grid.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "tsbi/control.hpp"
#include "tsbi/dermodels.hpp"
#include "tsbi/phasor.hpp"
#include "tsbi/smooth.hpp"

namespace tsbi::inverter {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kPi = std::numbers::pi;

struct SwitchTiming {
    double t_delay_on = 0.0;
    double t_rise = 0.0;
    double t_delay_off = 0.0;
    double t_fall = 0.0;

    double t_on() const { return t_delay_on + t_rise; }
    double t_off() const { return t_delay_off + t_fall; }
    bool operator==(const SwitchTiming&) const = default;
};

struct FscParams {
    double v_t0 = 0.0;  // V, switch threshold
    double r_t = 0.0;   // ohm, switch on-resistance
    double r_l = 0.0;   // ohm, inductor
    SwitchTiming timing;
    double f_sw = 50e3;
    bool operator==(const FscParams&) const = default;
};

struct SscParams {
    double v_t = 0.0;  // V, transistor threshold
    double r_t = 0.0;
    double v_d = 0.0;  // V, diode threshold
    double r_d = 0.0;
    SwitchTiming timing;
    double t_doff = 0.0;  // s, effective reverse-recovery duration
    double f_sw = 16e3;
    bool operator==(const SscParams&) const = default;
};

struct LclParams {
    double l1 = 2.23e-3;
    double l2 = 0.045e-3;
    double c = 15e-6;
    double r_damp = 0.55;
    double r1 = 0.004;
    double r2 = 0.004;
    double omega = 2.0 * kPi * 60.0;
    bool operator==(const LclParams&) const = default;
};

struct TsbiParams {
    FscParams fsc;
    SscParams ssc;
    LclParams lcl;
    double v_dc = 400.0;
    double s_rated = 10e3;
    double eps_sgn = 1e-6;   // A^2
    double eps_mag = 1e-9;   // A^2
    double eps_mcos = 1e-8;  // smoothing of |M cos(phi)|

    void validate() const;
    /// Same component values with every loss mechanism removed.
    TsbiParams lossless() const;
    bool operator==(const TsbiParams&) const = default;
};

/// Per-inverter unknowns. Field order is the column order of the inverter block.
template <class T>
struct BasicTsbiState {
    T v_t1{};
    T i_t1{};
    T d{};
    T i_dc{};
    T m_r{};
    T m_i{};
    BasicPhasor<T> v_ac;
    BasicPhasor<T> i_ac;
    BasicPhasor<T> v_m;  // capacitor node
    BasicPhasor<T> i_t2;
    T p_ctrl{};
    T q_ctrl{};

    static constexpr int kSize = 16;

    template <class Vec>
    static BasicTsbiState unpack(const Vec& x) {
        BasicTsbiState s;
        s.v_t1 = x[0];
        s.i_t1 = x[1];
        s.d = x[2];
        s.i_dc = x[3];
        s.m_r = x[4];
        s.m_i = x[5];
        s.v_ac = {x[6], x[7]};
        s.i_ac = {x[8], x[9]};
        s.v_m = {x[10], x[11]};
        s.i_t2 = {x[12], x[13]};
        s.p_ctrl = x[14];
        s.q_ctrl = x[15];
        return s;
    }

    std::array<T, kSize> pack() const {
        return {v_t1, i_t1, d, i_dc, m_r, m_i, v_ac.re, v_ac.im, i_ac.re, i_ac.im,
                v_m.re, v_m.im, i_t2.re, i_t2.im, p_ctrl, q_ctrl};
    }
};

using TsbiState = BasicTsbiState<double>;

/// Names of the 16 unknowns and of the 16 block equations, in block order.
const std::array<std::string, 16>& state_names();
const std::array<std::string, 16>& equation_names();

/// Checks 0 < d < 1, |m| <= 1 and finiteness.
void check_state(const TsbiState& s);

struct LossBreakdown {
    double fsc_switching = 0.0;
    double fsc_conduction = 0.0;
    double ssc_switching = 0.0;
    double ssc_reverse_recovery = 0.0;
    double ssc_conduction = 0.0;
    double lcl_resistive = 0.0;

    double total() const {
        return fsc_switching + fsc_conduction + ssc_switching + ssc_reverse_recovery + ssc_conduction +
               lcl_resistive;
    }
    double min_component() const;
};

// ---------------------------------------------------------------------------
// First-stage converter

/// Ideal buck-boost voltage gain d/(1-d). Throws unless 0 < d < 1.
double fsc_voltage_gain(double d);

template <class T>
T fsc_gain(const T& d) {
    return d / (1.0 - d);
}

/// Switching-loss currents (T1 side, DC side).
template <class T>
std::array<T, 2> fsc_switching_currents(const FscParams& p, const T& i_t1, const T& i_dc, double eps) {
    const double k = p.f_sw * (p.timing.t_on() + p.timing.t_off());
    return {k * smooth_abs(i_t1, eps), k * smooth_abs(i_dc, eps)};
}

/// Conduction drops (T1 side, DC side): duty-weighted threshold + resistive drops.
template <class T>
std::array<T, 2> fsc_conduction_drops(const FscParams& p, const T& d, const T& i_t1, const T& i_dc,
                                      double eps) {
    const double r = 2.0 * p.r_t + p.r_l;
    const T v1 = d * (2.0 * p.v_t0 * smooth_sgn(i_t1, eps) + i_t1 * r);
    const T v2 = (1.0 - d) * (2.0 * p.v_t0 * smooth_sgn(i_dc, eps) + i_dc * r);
    return {v1, v2};
}

/// KVL and KCL of the lossy FSC: (volts, amps).
template <class T>
std::array<T, 2> fsc_residuals(const TsbiParams& p, const BasicTsbiState<T>& s) {
    const auto isw = fsc_switching_currents(p.fsc, s.i_t1, s.i_dc, p.eps_sgn);
    const auto vc = fsc_conduction_drops(p.fsc, s.d, s.i_t1, s.i_dc, p.eps_sgn);
    const T gain = fsc_gain(s.d);
    const T r1 = p.v_dc - gain * (s.v_t1 - vc[0]) + vc[1];
    const T r2 = s.i_dc - (s.i_t1 - isw[0]) / gain + isw[1];
    return {r1, r2};
}

// ---------------------------------------------------------------------------
// Second-stage converter

/// sqrt(|i|^2 + eps): current magnitude regularized at the origin.
template <class T>
T smooth_magnitude(const BasicPhasor<T>& i, double eps) {
    return sqrt(i.re * i.re + i.im * i.im + eps);
}

/// DC-side switching + reverse-recovery current for an AC current magnitude.
template <class T>
T ssc_switching_current(const SscParams& p, const T& i_ac_mag) {
    return (2.0 * kSqrt2 / kPi) * p.f_sw * (p.timing.t_on() + p.timing.t_off() + p.t_doff) * i_ac_mag;
}

struct DeviceCurrents {
    double i_t_avg = 0.0;
    double i_t_rms = 0.0;
    double i_d_avg = 0.0;
    double i_d_rms = 0.0;
};

/// Per-device mean and RMS currents of the unipolar SPWM H-bridge.
DeviceCurrents ssc_device_currents(double m_cosphi, double i_ac_mag);

/// Bridge conduction loss (four transistors, four diodes) for a given |M cos(phi)|.
template <class T>
T ssc_conduction_loss_abs(const SscParams& p, const T& abs_mcos, const T& i_ac_mag) {
    const T lin = (kSqrt2 * i_ac_mag / (2.0 * kPi)) *
                  (p.v_t * (kPi * abs_mcos + 4.0) + p.v_d * (4.0 - kPi * abs_mcos));
    const T quad = (i_ac_mag * i_ac_mag / (3.0 * kPi)) *
                   (p.r_t * (8.0 * abs_mcos + 3.0 * kPi) + p.r_d * (3.0 * kPi - 8.0 * abs_mcos));
    return lin + quad;
}

/// Bridge conduction loss using |m_cosphi|.
double ssc_conduction_loss(const SscParams& p, double m_cosphi, double i_ac_mag);

/// Series conduction source aligned with the current so that it absorbs p_c and no reactive power.
template <class T>
BasicPhasor<T> ssc_conduction_voltage(const T& p_c, const BasicPhasor<T>& i_ac, double eps_mag) {
    const T den = i_ac.re * i_ac.re + i_ac.im * i_ac.im + eps_mag;
    return {p_c * i_ac.re / den, p_c * i_ac.im / den};
}

/// Modulation-power-factor product, clamped to [-1, 1].
template <class T>
T m_cosphi(const T& m_r, const T& m_i, const BasicPhasor<T>& i_ac, double eps_mag) {
    const T x = (m_r * i_ac.re + m_i * i_ac.im) / smooth_magnitude(i_ac, eps_mag);
    if (value_of(x) > 1.0) return T(1.0);
    if (value_of(x) < -1.0) return T(-1.0);
    return x;
}

/// Intermediate SSC quantities shared by the residuals and the loss breakdown.
template <class T>
struct SscTerms {
    T i_mag;
    T i_sw;
    T mcos;
    T p_c;
    BasicPhasor<T> v_c;
};

template <class T>
SscTerms<T> ssc_terms(const TsbiParams& p, const BasicTsbiState<T>& s) {
    SscTerms<T> t;
    t.i_mag = smooth_magnitude(s.i_ac, p.eps_mag);
    t.i_sw = ssc_switching_current(p.ssc, t.i_mag);
    t.mcos = m_cosphi(s.m_r, s.m_i, s.i_ac, p.eps_mag);
    t.p_c = ssc_conduction_loss_abs(p.ssc, smooth_abs(t.mcos, p.eps_mcos), t.i_mag);
    t.v_c = ssc_conduction_voltage(t.p_c, s.i_ac, p.eps_mag);
    return t;
}

/// AC voltage components (volts) and DC/AC power balance (watts).
template <class T>
std::array<T, 3> ssc_residuals(const TsbiParams& p, const BasicTsbiState<T>& s) {
    const auto t = ssc_terms(p, s);
    const double k = p.v_dc / kSqrt2;
    const T r1 = s.v_ac.re - s.m_r * k + t.v_c.re;
    const T r2 = s.v_ac.im - s.m_i * k + t.v_c.im;
    const T r3 = p.v_dc * (s.i_dc - t.i_sw) - (s.m_r * k) * s.i_ac.re - (s.m_i * k) * s.i_ac.im;
    return {r1, r2, r3};
}

// ---------------------------------------------------------------------------
// LCL filter

/// Current into the damping branch (R_d in series with C) at node voltage v_m.
template <class T>
BasicPhasor<T> lcl_capacitor_current(const LclParams& p, const BasicPhasor<T>& v_m) {
    // 1 / (r_d - j x_c) = (r_d + j x_c) / (r_d^2 + x_c^2)
    const double xc = 1.0 / (p.omega * p.c);
    const double den = p.r_damp * p.r_damp + xc * xc;
    const BasicPhasor<T> y{T(p.r_damp / den), T(xc / den)};
    return v_m * y;
}

/// KVL of L1 (2), KCL at the capacitor node (2), KVL of L2 (2).
template <class T>
std::array<T, 6> lcl_residuals(const LclParams& p, const BasicPhasor<T>& v_ac, const BasicPhasor<T>& i_ac,
                               const BasicPhasor<T>& v_m, const BasicPhasor<T>& v_t2,
                               const BasicPhasor<T>& i_t2) {
    const BasicPhasor<T> z1{T(p.r1), T(p.omega * p.l1)};
    const BasicPhasor<T> z2{T(p.r2), T(p.omega * p.l2)};
    const auto k1 = v_ac - v_m - z1 * i_ac;
    const auto kc = i_ac - lcl_capacitor_current(p, v_m) - i_t2;
    const auto k2 = v_m - v_t2 - z2 * i_t2;
    return {k1.re, k1.im, kc.re, kc.im, k2.re, k2.im};
}

// ---------------------------------------------------------------------------
// Assembled block

/// Everything an inverter needs besides its state and terminal voltage.
struct InverterModel {
    TsbiParams params;
    der::DerDevice der;
    ctrl::ControlSpec control;
    double v_base = 240.0;  // V, to express |v_t2| in p.u. for Volt-VAR
    double eps_v = 1e-12;   // p.u.^2, control-current denominator guard
};

/// The 16 residuals of one inverter at terminal voltage v_t2 (volts):
/// DER (1), FSC (2), SSC (3), LCL (6), control current (2), P law (1), Q law (1).
template <class T>
std::array<T, 16> assemble_inverter_block(const InverterModel& inv, const BasicTsbiState<T>& s,
                                          const BasicPhasor<T>& v_t2) {
    const auto& p = inv.params;
    std::array<T, 16> r;
    r[0] = der::der_residual(inv.der, s.v_t1, s.i_t1);
    const auto f = fsc_residuals(p, s);
    r[1] = f[0];
    r[2] = f[1];
    const auto g = ssc_residuals(p, s);
    r[3] = g[0];
    r[4] = g[1];
    r[5] = g[2];
    const auto l = lcl_residuals(p.lcl, s.v_ac, s.i_ac, s.v_m, v_t2, s.i_t2);
    for (int k = 0; k < 6; ++k) r[6 + k] = l[k];
    const auto ic = ctrl::ctrl_current(v_t2, s.p_ctrl, s.q_ctrl, inv.eps_v * inv.v_base * inv.v_base);
    r[12] = s.i_t2.re - ic.re;
    r[13] = s.i_t2.im - ic.im;
    r[14] = ctrl::p_law_residual(inv.control, s.p_ctrl, s.v_t1, s.i_t1, inv.der);
    const T v_mag = sqrt(v_t2.re * v_t2.re + v_t2.im * v_t2.im) / inv.v_base;
    r[15] = ctrl::q_law_residual(inv.control, s.p_ctrl, s.q_ctrl, v_mag);
    return r;
}

/// Characteristic magnitude of each block row (V, A or W) used to scale the
/// Newton system, and of each unknown.
std::array<double, 16> row_scales(const InverterModel& inv);
std::array<double, 16> column_scales(const TsbiParams& p);

/// Loss breakdown at a (converged) state. Components partition P_T1 - P_T2
/// exactly when all block residuals vanish.
LossBreakdown loss_breakdown(const TsbiParams& p, const TsbiState& s);

double power_t1(const TsbiState& s);
double power_t2(const TsbiState& s, const Phasor& v_t2);
double reactive_t2(const TsbiState& s, const Phasor& v_t2);

// ---------------------------------------------------------------------------
// Named component presets

struct MosfetPreset {
    double v_t0 = 0.30;
    double r_t = 0.025;
    SwitchTiming timing{14e-9, 15e-9, 58e-9, 11e-9};
};

struct DiodePreset {
    double v_d0 = 1.10;
    double r_d = 0.05;
    double t_rr = 75e-9;
};

MosfetPreset mosfet_spw47n60c3();
DiodePreset diode_mur460();
LclParams lcl_reznik();
/// Apparent-power ratings of the reference product family, VA.
const std::array<double, 4>& standard_ratings();

/// Full parameter set built from the presets above.
TsbiParams default_params(double s_rated = 10e3, double v_dc = 400.0);

}  // namespace tsbi::inverter
