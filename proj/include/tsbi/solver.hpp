#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <cstdint>
#include <string>
#include <vector>

#include "tsbi/control.hpp"
#include "tsbi/dermodels.hpp"
#include "tsbi/inverter.hpp"
#include "tsbi/netmodel.hpp"

namespace tsbi::solve {

/// One single-phase inverter attached phase-to-neutral at a node.
struct InverterSpec {
    std::string id;
    std::string node;
    net::Phase phase = net::Phase::A;
    der::DerDevice der = der::BatteryDer{};
    ctrl::ControlSpec control;
    inverter::TsbiParams params = inverter::default_params();
    bool operator==(const InverterSpec&) const = default;
};

enum class InitMode {
    Flat,        // nominal voltages, d = 0.5, |m| = 0.8, zero currents
    Consistent,  // lossless chain evaluated back from the T2 setpoints
};

struct SolverOptions {
    double tol_inf = 1e-8;  // on the scaled residual
    int max_iter = 50;
    double damping = 1.0;       // initial step factor
    double step_limit_v = 0.2;  // p.u. per iteration
    bool flat_start = true;     // false: use the supplied initial state
    InitMode init = InitMode::Flat;

    void validate() const;
    bool operator==(const SolverOptions&) const = default;
};

struct TraceRow {
    int iter = 0;
    double residual_inf = 0.0;
    double step_norm = 0.0;
    double damping = 0.0;
};

struct InverterResult {
    std::string id;
    inverter::TsbiState state;
    Phasor v_t2;  // V
    double p_t1 = 0.0;
    double p_t2 = 0.0;
    double q_t2 = 0.0;
    inverter::LossBreakdown losses;

    double efficiency() const;
    /// P_T1 - P_T2 - total losses.
    double audit_mismatch() const { return p_t1 - p_t2 - losses.total(); }
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<TraceRow> trace;
    std::vector<double> state;
    std::vector<InverterResult> inverters;
    int modulation_clamps = 0;
    std::string message;
};

/// Network plus inverters as one square nonlinear system.
///
/// Unknown layout: the network's node/phase voltages (p.u.) followed by 16
/// unknowns per inverter (SI). Network rows are p.u. currents; inverter rows
/// carry SI units and are divided by inverter::row_scales when scaled.
class PowerFlowSystem {
  public:
    PowerFlowSystem(const net::NetworkModel& net, std::vector<InverterSpec> inverters);

    const net::NetworkModel& network() const { return net_; }
    const std::vector<InverterSpec>& inverters() const { return specs_; }
    std::size_t size() const { return size_; }
    std::size_t inverter_offset(std::size_t k) const { return net_.state_size() + 16 * k; }
    /// State-vector index of the real part of the inverter's terminal voltage.
    std::size_t terminal_index(std::size_t k) const { return terminal_[k]; }
    const inverter::InverterModel& model(std::size_t k) const { return models_[k]; }

    std::vector<double> residual(const std::vector<double>& x) const;
    std::vector<double> scaled_residual(const std::vector<double>& x) const;
    double residual_norm(const std::vector<double>& x) const;

    /// Exact Jacobian of residual().
    Eigen::SparseMatrix<double> jacobian(const std::vector<double>& x) const;

    const Eigen::VectorXd& row_scale() const { return row_scale_; }
    const Eigen::VectorXd& col_scale() const { return col_scale_; }

    std::string equation_label(std::size_t row) const;
    std::string variable_label(std::size_t col) const;

    std::vector<double> initial_state(InitMode mode) const;

    inverter::TsbiState inverter_state(const std::vector<double>& x, std::size_t k) const;
    Phasor terminal_voltage(const std::vector<double>& x, std::size_t k) const;  // V
    InverterResult inverter_result(const std::vector<double>& x, std::size_t k) const;

  private:
    net::NetworkModel net_;
    std::vector<InverterSpec> specs_;
    std::vector<inverter::InverterModel> models_;
    std::vector<std::size_t> terminal_;
    std::vector<std::vector<std::size_t>> slot_inverters_;
    std::size_t size_ = 0;
    Eigen::VectorXd row_scale_;
    Eigen::VectorXd col_scale_;
};

/// Central-difference Jacobian of residual(); step h times each column scale.
Eigen::MatrixXd finite_diff_jacobian(const PowerFlowSystem& sys, const std::vector<double>& x, double h = 1e-6);

struct JacobianCheck {
    double max_rel_error = 0.0;
    std::string worst_row;
};

/// Largest row-relative gap between the analytic Jacobian and a Richardson
/// extrapolation of central differences at steps h and h/2, both measured with
/// columns multiplied by col_scale(). The extrapolation removes the O(h^2)
/// truncation term, which dominates near the Volt-VAR knees.
JacobianCheck check_jacobian(const PowerFlowSystem& sys, const std::vector<double>& x);

/// Random state near x: node voltages and inverter phasors scaled by up to 5%
/// and rotated by up to 0.05 rad, scalars scaled by up to 10%, d kept in
/// [0.1, 0.9] and |m| <= 0.95.
std::vector<double> random_state(const PowerFlowSystem& sys, const std::vector<double>& x, std::uint64_t seed);

/// Starting point for the Newton iteration.
std::vector<double> initialize_state(const PowerFlowSystem& sys, InitMode mode = InitMode::Flat);

/// Damped Newton on the coupled system. `x0` is used when opts.flat_start is false.
SolveReport solve_power_flow(const PowerFlowSystem& sys, const SolverOptions& opts,
                             const std::vector<double>* x0 = nullptr);

SolveReport solve_power_flow(const net::NetworkModel& net, const std::vector<InverterSpec>& inverters,
                             const SolverOptions& opts);

/// dx/dp_set at a solution for the ConstantP setpoint of inverter k.
std::vector<double> setpoint_sensitivity(const PowerFlowSystem& sys, const std::vector<double>& x, std::size_t k);

/// One inverter behind a stiff source: a single slack node at v_t2 (p.u. of
/// base.v_base) with the inverter attached. Used by sweeps and dispatch.
PowerFlowSystem single_inverter_system(const InverterSpec& inv, const net::PerUnitBase& base = {},
                                       Phasor v_t2_pu = {1.0, 0.0});

}  // namespace tsbi::solve
