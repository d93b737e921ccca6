#pragma once

#include <optional>
#include <stdexcept>
#include <variant>

#include "tsbi/smooth.hpp"

namespace tsbi::der {

/// V_OC = a + b * SOC
struct AffineVoc {
    double a = 0.0;
    double b = 0.0;
    bool operator==(const AffineVoc&) const = default;
};

/// Zeroth-order battery: open-circuit source behind an aggregate internal resistance.
struct BatteryParams {
    double c_batt = 972000.0;  // C (13.5 kWh at 50 V)
    double v_oc_nom = 50.0;    // V
    double r_int = 0.036;      // ohm
    double soc_min = 0.1;
    double soc_max = 0.95;
    double i_max = 200.0;      // A
    std::optional<AffineVoc> voc_curve;

    void validate() const;
    bool operator==(const BatteryParams&) const = default;
};

struct BatteryState {
    double soc = 0.5;
    bool operator==(const BatteryState&) const = default;
};

/// Raised when an SOC trajectory leaves [soc_min, soc_max] by more than 1e-9.
class SocBoundViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

double open_circuit_voltage(const BatteryParams& p, double soc);

/// Terminal voltage; discharge current is positive.
double battery_terminal_voltage(const BatteryParams& p, double soc, double i_batt);

/// Trapezoidal SOC step without bound checks.
inline double soc_step(const BatteryParams& p, double soc_t, double i_t, double i_t1, double dt) {
    return soc_t - dt / (2.0 * p.c_batt) * (i_t + i_t1);
}

/// Trapezoidal SOC step. Results within 1e-9 of a bound are clamped onto it;
/// anything further out throws SocBoundViolation.
double soc_update(const BatteryParams& p, double soc_t, double i_t, double i_t1, double dt);

/// Battery current that delivers DC power `p_dc` at the terminals (discharge positive).
/// Throws NumericalError when the power exceeds the source's maximum deliverable power.
double battery_current_for_power(const BatteryParams& p, double soc, double p_dc);

/// Single-diode PV model parameters.
struct PvParams {
    double i_ph = 0.0;  // A
    double i_0 = 1e-10;  // A
    double r_s = 0.0;    // ohm
    double r_sh = 1e3;   // ohm
    double n_d = 1.0;
    double n_s = 1.0;    // series cells
    double v_t = 0.025693;  // V per cell

    double v_th() const { return n_d * n_s * v_t; }
    void validate() const;
    bool operator==(const PvParams&) const = default;
};

/// LG400-class module (72 cells) fitted to datasheet Isc = 10.47 A, Voc = 49.3 V
/// and MPP (40.6 V, 9.86 A) with n_d fixed at 1.1.
PvParams lg400_fixture();

/// Implicit single-diode relation written as F(v, i) = 0; F is increasing in i.
template <class T>
T pv_residual(const PvParams& p, const T& v, const T& i) {
    const T vd = v + i * p.r_s;
    return i - (p.i_ph - p.i_0 * (guarded_exp(vd / p.v_th()) - 1.0) - vd / p.r_sh);
}

/// Diode-plus-shunt small-signal conductance at the junction, g = dI_loss/dV_D.
template <class T>
T pv_junction_conductance(const PvParams& p, const T& v, const T& i) {
    const T vd = v + i * p.r_s;
    return p.i_0 * guarded_exp(vd / p.v_th()) / p.v_th() + 1.0 / p.r_sh;
}

/// dI/dV along the I-V curve at (v, i).
template <class T>
T pv_didv(const PvParams& p, const T& v, const T& i) {
    const T g = pv_junction_conductance(p, v, i);
    return -g / (1.0 + p.r_s * g);
}

/// dP/dV = I + V dI/dV; zero at the maximum power point.
template <class T>
T mpp_condition(const PvParams& p, const T& v, const T& i) {
    return i + v * pv_didv(p, v, i);
}

double pv_open_circuit_voltage(const PvParams& p);

/// Output current at terminal voltage v in [0, Voc]. Safeguarded Newton on the
/// implicit relation with bisection fallback; |F| < 1e-10 A on return.
double pv_current(const PvParams& p, double v_pv);

struct MppPoint {
    double v_mp = 0.0;
    double i_mp = 0.0;
    double p_mp = 0.0;
};

struct MppSolve {
    MppPoint point;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // inf-norm of the two equations, A
};

/// Maximum of V*I over an n-point uniform voltage sweep on [0, Voc].
MppPoint sweep_mpp(const PvParams& p, int points);

/// Simultaneous Newton solution of the I-V relation and the closed-form MPP
/// current expression in (V_MP, I_MP), started from a 50-point sweep.
MppSolve solve_mpp(const PvParams& p, int max_iter = 50);

/// DER attached at an inverter's DC terminal.
struct BatteryDer {
    BatteryParams params;
    BatteryState state;
    bool operator==(const BatteryDer&) const = default;
};

struct PvDer {
    PvParams params;
    bool operator==(const PvDer&) const = default;
};

using DerDevice = std::variant<BatteryDer, PvDer>;

/// Terminal I-V relation of the device as a single residual. Battery rows are
/// in volts, PV rows in amps.
template <class T>
T der_residual(const DerDevice& der, const T& v_t1, const T& i_t1) {
    if (const auto* b = std::get_if<BatteryDer>(&der))
        return v_t1 - (open_circuit_voltage(b->params, b->state.soc) - i_t1 * b->params.r_int);
    return pv_residual(std::get<PvDer>(der).params, v_t1, i_t1);
}

}  // namespace tsbi::der
