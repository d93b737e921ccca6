#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsbi/dispatch.hpp"
#include "tsbi/efficiency.hpp"
#include "tsbi/scenario.hpp"
#include "tsbi/tdbench.hpp"

namespace tsbi::shell {

enum ExitCode : int { kOk = 0, kInputError = 2, kNonConvergence = 3, kInvariantViolation = 4 };

/// Command-line overrides applied on top of a scenario.
struct Overrides {
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<double> eps_sgn;
    std::optional<double> eps_vv;
    int threads = 1;
};

void apply_overrides(ScenarioFile& s, const Overrides& o);

// Each run_* function is pure: it returns the CSV text and status, and the
// matching cmd_* wrapper writes the files and maps the status to an exit code.

struct PfResult {
    solve::SolveReport report;
    std::string voltages_csv;   // node, phase, v_re_pu, v_im_pu, v_mag_pu, angle_deg
    std::string inverters_csv;  // per-inverter operating point and loss breakdown
    std::string trace_csv;      // iter, residual_inf, step_norm, damping
    std::vector<std::string> violations;
};
PfResult run_pf(const ScenarioFile& s);
int cmd_pf(const std::string& scenario_path, const std::string& out_dir, const Overrides& o);

struct SweepSpec {
    double p_min = 0.0, p_max = 0.0;  // W; both zero selects 2%..100% of the rating
    int np = 50;
    double q_min = 0.0, q_max = 0.0;  // var; both zero selects +-40% of the rating
    int nq = 21;
};
struct SweepResult {
    std::vector<double> p_values, q_values;
    std::vector<solve::OperatingPoint> points;  // p-major
    std::string csv;
    int failed = 0;
};
/// Efficiency surface of one inverter fed by an ideal DC source at v_dc_source.
SweepResult run_sweep(const inverter::TsbiParams& params, double v_dc_source, const SweepSpec& spec, int threads);
int cmd_sweep_eff(const std::string& params_path, const std::string& out_dir, const SweepSpec& spec,
                  const Overrides& o);

struct TdResult {
    td::TdValidation validation;
    td::EnergyAudit audit;
    std::string errors_csv;   // quantity, model, td, error_pct
    std::string metrics_csv;  // one row of oracle metrics
    std::string waveform_csv;  // optional dump; empty unless requested
};
TdResult run_validate_td(const td::TdConfig& cfg, const inverter::TsbiParams& params, double p_target,
                         int window_cycles, bool dump_waveform = false);
int cmd_validate_td(const std::string& params_path, const std::string& out_dir, double p_target, double dt,
                    bool dump_waveform);

struct MppRow {
    std::string id;
    der::PvParams pv;
};
std::string run_mpp(const std::vector<MppRow>& rows);
int cmd_mpp(const std::string& scenario_path, const std::string& out_dir);

struct DispatchRun {
    dispatch::Schedule schedule;
    dispatch::Schedule idle;
    std::string schedule_csv;
};
/// Solves the scenario with its own model; `summary_csv` gets one row per run.
DispatchRun run_dispatch(const dispatch::DispatchScenario& scn);
std::string dispatch_summary_csv(const std::vector<std::pair<dispatch::DispatchScenario, DispatchRun>>& runs);
int cmd_dispatch(const std::string& scenario_path, const std::string& out_dir, const std::string& model,
                 const Overrides& o);

struct JacobianReport {
    std::string csv;  // sample, residual_inf, max_rel_error, worst_row
    double worst = 0.0;
};
JacobianReport run_check_jacobian(const ScenarioFile& s, int samples, std::uint64_t seed);
int cmd_check_jacobian(const std::string& scenario_path, const std::string& out_dir, int samples,
                       const Overrides& o);

}  // namespace tsbi::shell
