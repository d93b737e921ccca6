#include "tsbi/inverter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsbi/errors.hpp"

namespace tsbi::inverter {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

bool nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void check_timing(const SwitchTiming& t) {
    require(nonneg(t.t_delay_on) && nonneg(t.t_rise) && nonneg(t.t_delay_off) && nonneg(t.t_fall),
            "switch timings must be non-negative");
}

}  // namespace

void TsbiParams::validate() const {
    require(nonneg(fsc.v_t0) && nonneg(fsc.r_t) && nonneg(fsc.r_l), "FSC loss constants must be >= 0");
    check_timing(fsc.timing);
    require(positive(fsc.f_sw), "FSC f_sw must be > 0");
    require(fsc.f_sw * (fsc.timing.t_on() + fsc.timing.t_off()) < 1.0, "FSC transitions exceed the period");

    require(nonneg(ssc.v_t) && nonneg(ssc.r_t) && nonneg(ssc.v_d) && nonneg(ssc.r_d),
            "SSC loss constants must be >= 0");
    check_timing(ssc.timing);
    require(nonneg(ssc.t_doff), "SSC t_doff must be >= 0");
    require(positive(ssc.f_sw), "SSC f_sw must be > 0");
    require(ssc.f_sw * (ssc.timing.t_on() + ssc.timing.t_off() + ssc.t_doff) < 1.0,
            "SSC transitions exceed the period");

    require(positive(lcl.l1) && positive(lcl.l2) && positive(lcl.c), "LCL l1, l2, c must be > 0");
    require(nonneg(lcl.r_damp) && nonneg(lcl.r1) && nonneg(lcl.r2), "LCL resistances must be >= 0");
    require(positive(lcl.omega), "LCL omega must be > 0");

    require(positive(v_dc), "v_dc must be > 0");
    require(positive(s_rated), "s_rated must be > 0");
    require(positive(eps_sgn) && positive(eps_mag) && positive(eps_mcos), "smoothing constants must be > 0");
}

TsbiParams TsbiParams::lossless() const {
    TsbiParams p = *this;
    p.fsc.v_t0 = p.fsc.r_t = p.fsc.r_l = 0.0;
    p.fsc.timing = {};
    p.ssc.v_t = p.ssc.r_t = p.ssc.v_d = p.ssc.r_d = 0.0;
    p.ssc.timing = {};
    p.ssc.t_doff = 0.0;
    p.lcl.r1 = p.lcl.r2 = 0.0;
    return p;
}

const std::array<std::string, 16>& state_names() {
    static const std::array<std::string, 16> names{
        "v_t1", "i_t1", "d", "i_dc", "m_r", "m_i", "v_ac.re", "v_ac.im",
        "i_ac.re", "i_ac.im", "v_m.re", "v_m.im", "i_t2.re", "i_t2.im", "p_ctrl", "q_ctrl"};
    return names;
}

const std::array<std::string, 16>& equation_names() {
    static const std::array<std::string, 16> names{
        "der",      "fsc.kvl",  "fsc.kcl",   "ssc.v_re", "ssc.v_im",  "ssc.power",
        "l1.re",    "l1.im",    "node_m.re", "node_m.im", "l2.re",    "l2.im",
        "i_ctrl.re", "i_ctrl.im", "p_law",   "q_law"};
    return names;
}

void check_state(const TsbiState& s) {
    for (double x : s.pack()) require(std::isfinite(x), "inverter state has a non-finite entry");
    require(s.d > 0.0 && s.d < 1.0, "duty cycle outside (0, 1)");
    require(std::hypot(s.m_r, s.m_i) <= 1.0 + 1e-12, "modulation magnitude above 1");
}

double LossBreakdown::min_component() const {
    return std::min({fsc_switching, fsc_conduction, ssc_switching, ssc_reverse_recovery, ssc_conduction,
                     lcl_resistive});
}

double fsc_voltage_gain(double d) {
    if (!(d > 0.0 && d < 1.0)) throw InputError("duty cycle outside (0, 1)");
    return d / (1.0 - d);
}

DeviceCurrents ssc_device_currents(double m_cosphi, double i_ac_mag) {
    const double a = std::fabs(m_cosphi);
    const double i = i_ac_mag;
    DeviceCurrents c;
    c.i_t_avg = kSqrt2 * i / (8.0 * kPi) * (4.0 + kPi * a);
    c.i_d_avg = kSqrt2 * i / (8.0 * kPi) * (4.0 - kPi * a);
    const double k = i / (6.0 * std::sqrt(kPi));
    c.i_t_rms = k * std::sqrt(9.0 * kPi + 24.0 * a);
    c.i_d_rms = k * std::sqrt(9.0 * kPi - 24.0 * a);
    return c;
}

double ssc_conduction_loss(const SscParams& p, double m_cosphi, double i_ac_mag) {
    return ssc_conduction_loss_abs(p, std::fabs(m_cosphi), i_ac_mag);
}

std::array<double, 16> row_scales(const InverterModel& inv) {
    const double v = inv.params.v_dc;
    const double i = inv.params.s_rated / inv.params.v_dc;
    const double s = inv.params.s_rated;
    const bool pv = std::holds_alternative<der::PvDer>(inv.der);
    const bool mppt = std::holds_alternative<ctrl::Mppt>(inv.control.p_law);
    return {pv ? i : v, v, i, v, v, s, v, v, i, i, v, v, i, i, mppt ? i : s, s};
}

std::array<double, 16> column_scales(const TsbiParams& p) {
    const double v = p.v_dc;
    const double i = p.s_rated / p.v_dc;
    const double s = p.s_rated;
    return {v, i, 1.0, i, 1.0, 1.0, v, v, i, i, v, v, i, i, s, s};
}

LossBreakdown loss_breakdown(const TsbiParams& p, const TsbiState& s) {
    LossBreakdown out;

    const auto isw = fsc_switching_currents(p.fsc, s.i_t1, s.i_dc, p.eps_sgn);
    const auto vc = fsc_conduction_drops(p.fsc, s.d, s.i_t1, s.i_dc, p.eps_sgn);
    out.fsc_switching = s.v_t1 * isw[0] + p.v_dc * isw[1];
    out.fsc_conduction = vc[0] * (s.i_t1 - isw[0]) + vc[1] * (s.i_dc + isw[1]);

    const auto t = ssc_terms(p, s);
    const double k = (2.0 * kSqrt2 / kPi) * p.ssc.f_sw * t.i_mag;
    out.ssc_switching = p.v_dc * k * (p.ssc.timing.t_on() + p.ssc.timing.t_off());
    out.ssc_reverse_recovery = p.v_dc * k * p.ssc.t_doff;
    out.ssc_conduction = dot(t.v_c, s.i_ac);

    const auto i_cap = lcl_capacitor_current(p.lcl, s.v_m);
    out.lcl_resistive = p.lcl.r1 * norm2(s.i_ac) + p.lcl.r2 * norm2(s.i_t2) + p.lcl.r_damp * norm2(i_cap);
    return out;
}

double power_t1(const TsbiState& s) { return s.v_t1 * s.i_t1; }
double power_t2(const TsbiState& s, const Phasor& v_t2) { return dot(v_t2, s.i_t2); }
double reactive_t2(const TsbiState& s, const Phasor& v_t2) { return cross(v_t2, s.i_t2); }

MosfetPreset mosfet_spw47n60c3() { return {}; }
DiodePreset diode_mur460() { return {}; }
LclParams lcl_reznik() { return {}; }

const std::array<double, 4>& standard_ratings() {
    static const std::array<double, 4> r{5800.0, 7600.0, 10000.0, 11500.0};
    return r;
}

TsbiParams default_params(double s_rated, double v_dc) {
    const auto sw = mosfet_spw47n60c3();
    const auto di = diode_mur460();
    TsbiParams p;
    p.fsc.v_t0 = sw.v_t0;
    p.fsc.r_t = sw.r_t;
    p.fsc.r_l = 1.8e-3;
    p.fsc.timing = sw.timing;
    p.fsc.f_sw = 50e3;
    p.ssc.v_t = sw.v_t0;
    p.ssc.r_t = sw.r_t;
    p.ssc.v_d = di.v_d0;
    p.ssc.r_d = di.r_d;
    p.ssc.timing = sw.timing;
    p.ssc.t_doff = di.t_rr;
    p.ssc.f_sw = 16e3;
    p.lcl = lcl_reznik();
    p.v_dc = v_dc;
    p.s_rated = s_rated;
    return p;
}

}  // namespace tsbi::inverter
