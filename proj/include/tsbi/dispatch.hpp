#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tsbi/dermodels.hpp"
#include "tsbi/inverter.hpp"

namespace tsbi::dispatch {

/// Constant-efficiency model with a relaxed complementarity constraint
/// P_c * P_d <= eps_cs between battery-side charge and discharge power.
struct CeCs {
    double eta_c = 0.97;
    double eta_d = 0.97;
    double eps_cs = 1.0;  // W^2
    bool operator==(const CeCs&) const = default;
};

/// One signed inverter power per step; converter losses from the inverter model.
struct TsbiModel {
    bool operator==(const TsbiModel&) const = default;
};

using DispatchModel = std::variant<CeCs, TsbiModel>;

struct DispatchScenario {
    double dt = 3600.0;                 // s
    std::vector<double> price;          // currency per kWh
    std::vector<double> load_w;
    std::vector<double> pv_w;
    der::BatteryParams battery;
    double soc0 = 0.5;
    double p_batt_max = 5000.0;         // W, battery side, both directions
    inverter::TsbiParams inverter = inverter::default_params(11500.0, 400.0);
    DispatchModel model = TsbiModel{};

    std::size_t horizon() const { return price.size(); }
    /// Usable energy scale of the battery, kWh (c_batt * v_oc_nom).
    double capacity_kwh() const { return battery.c_batt * battery.v_oc_nom / 3.6e6; }
    void validate() const;
    bool operator==(const DispatchScenario&) const = default;
};

struct DispatchOptions {
    int rounds = 5;
    double rho0 = 10.0;
    double rho_growth = 10.0;
    double tol = 1e-7;      // projected-gradient inf-norm, kW units
    int max_iter = 500;     // Newton iterations per round
    double smooth_kw = 0.01;  // smoothing width of max(grid, 0), kW
};

struct Schedule {
    DispatchModel model;
    std::vector<double> p_inv_w;        // AC, positive into the home
    std::vector<double> p_charge_w;     // battery side; zero for TSBI
    std::vector<double> p_discharge_w;  // battery side; zero for TSBI
    std::vector<double> battery_w;      // battery-side net discharge
    std::vector<double> soc;            // horizon + 1 entries
    std::vector<double> grid_w;         // import positive
    std::vector<double> cost;           // per step
    double objective = 0.0;
    bool converged = false;
    double gradient_norm = 0.0;
    int iterations = 0;
};

/// Converter loss as a smooth function of signed AC power, tabulated from
/// single-inverter solves at unity power factor and interpolated with cubic
/// Hermite segments.
class LossCurve {
  public:
    LossCurve(const inverter::TsbiParams& params, double v_dc_source, int points = 101);
    double p_max() const { return p_.back(); }
    double loss(double p_w) const;
    double slope(double p_w) const;

  private:
    std::vector<double> p_, l_, m_;
};

/// Energy-weighted charging and discharging efficiencies over the power levels
/// (W, positive magnitudes).
struct WeightedEfficiency {
    double eta_c = 0.0;
    double eta_d = 0.0;
};
WeightedEfficiency effective_weighted_efficiency(const inverter::TsbiParams& params,
                                                 const std::vector<double>& levels_w, double v_dc_source = 400.0);

Schedule solve_dispatch(const DispatchScenario& scn, const DispatchOptions& opts = {});

/// Schedule with the battery idle: p_inv = pv for CE-CS, p_inv = the PV power
/// net of converter loss for TSBI.
Schedule idle_schedule(const DispatchScenario& scn, const DispatchOptions& opts = {});

/// Largest P_c * P_d over the steps (W^2); exactly 0 for TSBI schedules.
double complementarity_residual(const Schedule& s);

/// Synthetic 24-step day: two-tier price, bell-shaped PV, evening-peak load.
DispatchScenario synthetic_day(DispatchModel model = TsbiModel{});

/// step, price, load_w, pv_w, p_inv_w, soc, grid_w, cost
std::string schedule_csv(const DispatchScenario& scn, const Schedule& s);

}  // namespace tsbi::dispatch
