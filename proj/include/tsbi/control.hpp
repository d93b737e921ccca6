#pragma once

#include <variant>

#include "tsbi/dermodels.hpp"
#include "tsbi/phasor.hpp"
#include "tsbi/smooth.hpp"

namespace tsbi::ctrl {

struct ConstantP {
    double p_set = 0.0;  // W delivered at T2
    bool operator==(const ConstantP&) const = default;
};

/// Operate the PV source at dP/dV = 0.
struct Mppt {
    bool operator==(const Mppt&) const = default;
};

using PLaw = std::variant<ConstantP, Mppt>;

struct ConstantQ {
    double q_set = 0.0;  // var
    bool operator==(const ConstantQ&) const = default;
};

/// Lagging: q carries the sign of p. Leading: opposite sign.
enum class PfSign { Lagging, Leading };

struct ConstantPF {
    double pf = 1.0;
    PfSign sign = PfSign::Lagging;
    bool operator==(const ConstantPF&) const = default;
};

/// Volt-VAR curve on the terminal voltage magnitude (p.u.). Reactive power is
/// injection-positive: q_max >= 0 is supplied at low voltage, q_min <= 0 absorbed
/// at high voltage.
struct VoltVar {
    double v1 = 0.90;
    double v2 = 0.98;
    double v3 = 1.02;
    double v4 = 1.10;
    double q_max = 2500.0;
    double q_min = -2500.0;
    double eps_vv = 1e-8;  // p.u.^2

    /// Breakpoints (0.90, 0.98, 1.02, 1.10) p.u. with |Q| limited to 0.25 of the rating.
    static VoltVar default_curve(double s_rated);
    bool operator==(const VoltVar&) const = default;
};

using QLaw = std::variant<ConstantQ, ConstantPF, VoltVar>;

struct ControlSpec {
    PLaw p_law = ConstantP{};
    QLaw q_law = ConstantQ{};

    void validate() const;
    /// Also rejects MPPT on a battery.
    void validate_for(const der::DerDevice& der) const;
    bool operator==(const ControlSpec&) const = default;
};

/// Controlled current source at T2 delivering (p, q) at voltage v.
template <class T>
BasicPhasor<T> ctrl_current(const BasicPhasor<T>& v, const T& p, const T& q, double eps_v) {
    const T den = v.re * v.re + v.im * v.im + eps_v;
    return {(p * v.re + q * v.im) / den, (p * v.im - q * v.re) / den};
}

/// Active-power law row. ConstantP in watts; MPPT in amps (dP/dV at T1).
template <class T>
T p_law_residual(const ControlSpec& spec, const T& p_ctrl, const T& v_t1, const T& i_t1,
                 const der::DerDevice& der) {
    if (const auto* cp = std::get_if<ConstantP>(&spec.p_law)) return p_ctrl - cp->p_set;
    const auto& pv = std::get<der::PvDer>(der).params;
    return der::mpp_condition(pv, v_t1, i_t1);
}

/// Exact piecewise-linear Volt-VAR curve.
double voltvar_piecewise(const VoltVar& vv, double v_mag);

/// Smooth Volt-VAR curve: the ramp form of the piecewise curve with every |x|
/// replaced by sqrt(x^2 + eps_vv).
template <class T>
T voltvar_q(const VoltVar& vv, const T& v) {
    const double e = vv.eps_vv;
    const T lower = smooth_ramp(v - vv.v1, e) - smooth_ramp(v - vv.v2, e);
    const T upper = smooth_ramp(v - vv.v3, e) - smooth_ramp(v - vv.v4, e);
    return vv.q_max - vv.q_max / (vv.v2 - vv.v1) * lower + vv.q_min / (vv.v4 - vv.v3) * upper;
}

/// Uniform bound on |voltvar_q - voltvar_piecewise|.
double voltvar_error_bound(const VoltVar& vv);

/// Reactive-power law row, in vars. v_mag is the terminal voltage magnitude in p.u.
template <class T>
T q_law_residual(const ControlSpec& spec, const T& p_ctrl, const T& q_ctrl, const T& v_mag) {
    if (const auto* cq = std::get_if<ConstantQ>(&spec.q_law)) return q_ctrl - cq->q_set;
    if (const auto* pf = std::get_if<ConstantPF>(&spec.q_law)) {
        const double sign = pf->sign == PfSign::Lagging ? 1.0 : -1.0;
        return q_ctrl * pf->pf - sign * std::sqrt(1.0 - pf->pf * pf->pf) * p_ctrl;
    }
    return q_ctrl - voltvar_q(std::get<VoltVar>(spec.q_law), v_mag);
}

struct ApparentPowerCheck {
    bool ok = true;
    double s_mag = 0.0;
};

/// Flags |S| > s_rated. Diagnostic only; not part of the residual system.
ApparentPowerCheck apparent_power_check(double p_ctrl, double q_ctrl, double s_rated);

}  // namespace tsbi::ctrl
