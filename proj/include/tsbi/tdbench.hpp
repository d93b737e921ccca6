#pragma once

// Switching time-domain model of the H-bridge + LCL stage, used as an oracle
// for the steady-state conduction-loss formulas.
//
// Waveform convention: a phasor X stands for x(t) = sqrt(2)·|X|·sin(ωt + ∠X).
// The leg-A reference is m·sin(ωt + θ) and leg B uses its negative (unipolar
// SPWM), so the fundamental bridge voltage is the phasor m·v_dc/√2 ∠θ.

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "tsbi/inverter.hpp"
#include "tsbi/phasor.hpp"

namespace tsbi::td {

/// Stiff sinusoidal source behind L2 (RMS phasor, volts).
struct StiffGrid {
    Phasor v{120.0, 0.0};
};

/// Resistor across the output (ohms).
struct ResistiveLoad {
    double r = 10.0;
};

using TdLoad = std::variant<StiffGrid, ResistiveLoad>;

enum class Sampling {
    Midpoint,    // leg state sampled once per step at the step midpoint
    Fractional,  // exact on-time fraction of each leg within the step
};

struct TdConfig {
    double dt = 1e-6;
    double carrier_freq = 16e3;
    double ref_freq = 60.0;
    double v_dc = 200.0;
    double m = 0.85;
    double theta = 0.0;  // rad
    TdLoad load = StiffGrid{};
    double duration = 0.5;
    double record_from = 0.2;
    Sampling sampling = Sampling::Fractional;

    void validate() const;
};

/// Recorded interval [record_from, duration]. Node values have n_steps()+1
/// entries; leg on-fractions have one entry per step.
struct Waveforms {
    TdConfig config;
    inverter::SscParams ssc;
    inverter::LclParams lcl;
    double t0 = 0.0;
    std::vector<double> i1;   // bridge-side inductor current, A
    std::vector<double> i2;   // grid-side inductor current, A
    std::vector<double> v_c;  // filter capacitor voltage, V
    std::vector<double> s_a;  // upper-switch on-fraction of leg A
    std::vector<double> s_b;

    std::size_t n_steps() const { return s_a.size(); }
};

struct TdMetrics {
    double i_t_avg = 0.0;
    double i_t_rms = 0.0;
    double i_d_avg = 0.0;
    double i_d_rms = 0.0;
    double v_cond = 0.0;      // conduction power / fundamental RMS current, V
    double p_cond = 0.0;      // total conduction power of the 8 devices, W
    double i_ac_rms = 0.0;    // fundamental RMS of i1, A
    double v_bridge_rms = 0.0;  // fundamental RMS of the bridge voltage, V
    double p_dc = 0.0;        // mean DC source power, W
    double p_out_avg = 0.0;   // mean power into the load, W
    // Per device: upper A, lower A, upper B, lower B.
    std::array<double, 4> t_avg_each{}, t_rms_each{}, d_avg_each{}, d_rms_each{};
};

/// RK4 integration with the switched bridge. Starts from the sinusoidal steady
/// state of the lossless filter. Throws NumericalError on blow-up, naming the step.
Waveforms simulate(const TdConfig& cfg, const inverter::SscParams& ssc, const inverter::LclParams& lcl);

/// Means and RMS values over the last `window_cycles` fundamental cycles.
TdMetrics extract_metrics(const Waveforms& w, int window_cycles);

struct EnergyAudit {
    double source = 0.0;
    double load = 0.0;
    double devices = 0.0;
    double filter = 0.0;
    double stored_change = 0.0;
    double mismatch() const { return source - load - devices - filter - stored_change; }
};

EnergyAudit energy_audit(const Waveforms& w);

/// Steady-state model evaluated at the same modulation phasor.
struct SteadyStatePrediction {
    Phasor i_ac;
    Phasor i_out;
    double m_cosphi = 0.0;
    double i_t_avg = 0.0;
    double i_t_rms = 0.0;
    double i_d_avg = 0.0;
    double i_d_rms = 0.0;
    double p_cond = 0.0;
    double v_cond = 0.0;
    double p_dc = 0.0;  // without switching loss
    double p_out = 0.0;
};

SteadyStatePrediction predict_steady_state(const TdConfig& cfg, const inverter::SscParams& ssc,
                                           const inverter::LclParams& lcl);

struct ErrorRow {
    std::string quantity;
    double model = 0.0;
    double reference = 0.0;
    double error_pct = 0.0;
};

/// |model - reference| / |reference| · 100 for the five device quantities.
std::array<ErrorRow, 5> compare_with_steady_state(const TdMetrics& td, const SteadyStatePrediction& model);
std::array<ErrorRow, 5> compare_with_steady_state(const std::array<double, 5>& td, const std::array<double, 5>& model);

/// Modulation angle at which the time-domain DC power equals p_target (bisection).
double find_theta_for_power(TdConfig cfg, const inverter::SscParams& ssc, const inverter::LclParams& lcl,
                            double p_target, double tol_w = 0.05);

struct TdValidation {
    TdConfig config;
    TdMetrics metrics;
    SteadyStatePrediction prediction;
    std::array<ErrorRow, 5> errors;
    double dt_halving_max_change = -1.0;  // relative, when requested
};

/// Full protocol: fix (v_dc, grid, m), solve for θ at p_target, simulate,
/// and compare with the steady-state predictions.
TdValidation validate(const TdConfig& base, const inverter::SscParams& ssc, const inverter::LclParams& lcl,
                      double p_target = 1440.0, int window_cycles = 18);

}  // namespace tsbi::td
