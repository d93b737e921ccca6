#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsbi/phasor.hpp"

namespace tsbi::net {

enum class Phase : int { A = 0, B = 1, C = 2 };

using PhaseSet = std::array<bool, 3>;
using Block3 = std::array<std::array<double, 3>, 3>;

char phase_letter(Phase p);
Phase parse_phase(char c);
PhaseSet parse_phase_set(const std::string& s);
std::string format_phase_set(const PhaseSet& s);

struct PerUnitBase {
    double s_base = 10e3;  // VA per phase
    double v_base = 240.0;  // V line-to-neutral
    double freq = 60.0;

    double i_base() const { return s_base / v_base; }
    void validate() const;
    bool operator==(const PerUnitBase&) const = default;
};

enum class NodeKind { Slack, Load };

struct NodeSpec {
    std::string id;
    PhaseSet phases{true, true, true};
    NodeKind kind = NodeKind::Load;
    /// One entry per declared phase, in a-b-c order (slack only), p.u.
    std::vector<Phasor> slack_voltage;
    bool operator==(const NodeSpec&) const = default;
};

struct BranchSpec {
    std::string from;
    std::string to;
    Block3 g_block{};  // p.u.
    Block3 b_block{};  // p.u.
    bool operator==(const BranchSpec&) const = default;
};

struct LoadSpec {
    std::string node;
    Phase phase = Phase::A;
    double p = 0.0;  // W
    double q = 0.0;  // var
    bool operator==(const LoadSpec&) const = default;
};

/// Load (or generator) current drawn at a node for a constant-PQ element.
/// The |v|^2 denominator is regularized by eps_v (p.u.^2).
template <class T>
BasicPhasor<T> load_injection_current(const BasicPhasor<T>& v, double p, double q, double eps_v) {
    const T den = v.re * v.re + v.im * v.im + eps_v;
    return {(p * v.re + q * v.im) / den, (p * v.im - q * v.re) / den};
}

/// Checked double-precision form; rejects non-finite input.
Phasor load_current(const Phasor& v, double p, double q, double eps_v = 1e-12);

struct PowerInjection {
    double p = 0.0;
    double q = 0.0;
};

/// Net current at a node/phase: sum of load currents minus generator currents.
Phasor net_injection(std::span<const PowerInjection> loads, std::span<const PowerInjection> gens,
                     const Phasor& v, double eps_v = 1e-12);

/// Compiled, immutable equivalent-circuit network.
///
/// The state vector holds two reals (re, im) for every declared node/phase,
/// nodes in declaration order and phases in a-b-c order. Slack node/phases
/// keep their unknowns; their KCL rows are replaced by V - V_slack = 0.
class NetworkModel {
  public:
    struct Incidence {
        std::size_t branch;
        std::size_t other;  // other node index
        bool is_from;
    };

    NetworkModel(PerUnitBase base, std::vector<NodeSpec> nodes, std::vector<BranchSpec> branches,
                 std::vector<LoadSpec> loads, double eps_v = 1e-12);

    const PerUnitBase& base() const { return base_; }
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const std::vector<BranchSpec>& branches() const { return branches_; }
    const std::vector<LoadSpec>& loads() const { return loads_; }
    double eps_v() const { return eps_v_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t node_phase_count() const { return slot_count_; }
    std::size_t state_size() const { return 2 * slot_count_; }

    std::size_t node_index(const std::string& id) const;
    bool has_phase(std::size_t node, Phase ph) const;
    /// State-vector index of the real part of node/phase (twice the slot number); im follows at +1.
    std::size_t slot(std::size_t node, Phase ph) const;
    bool is_slack_slot(std::size_t node_phase) const { return slack_[node_phase]; }
    const Phasor& slack_voltage(std::size_t node_phase) const { return slack_v_[node_phase]; }

    /// Loads attached to a node/phase slot, converted to p.u.
    const std::vector<PowerInjection>& slot_loads(std::size_t node_phase) const {
        return slot_loads_[node_phase];
    }
    const std::vector<Incidence>& incidences(std::size_t node) const { return incidence_[node]; }

    /// (node, phase) for a node/phase slot number.
    std::pair<std::size_t, Phase> slot_owner(std::size_t node_phase) const {
        return slot_owner_[node_phase];
    }

    Phasor voltage(std::span<const double> v_all, std::size_t node_phase) const {
        return {v_all[2 * node_phase], v_all[2 * node_phase + 1]};
    }

    /// Current flowing from `from` to `to` on phase ph of a branch, p.u.
    Phasor branch_current(std::size_t branch, std::span<const double> v_all, Phase ph) const;

    /// Flat-start voltages: 1 p.u. at 0/-120/+120 degrees, slack at its setpoint.
    std::vector<double> flat_start() const;

  private:
    PerUnitBase base_;
    std::vector<NodeSpec> nodes_;
    std::vector<BranchSpec> branches_;
    std::vector<LoadSpec> loads_;
    double eps_v_;

    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::array<long, 3>> slots_;  // -1 when phase absent
    std::size_t slot_count_ = 0;
    std::vector<bool> slack_;
    std::vector<Phasor> slack_v_;
    std::vector<std::vector<PowerInjection>> slot_loads_;
    std::vector<std::vector<Incidence>> incidence_;
    std::vector<std::pair<std::size_t, Phase>> slot_owner_;
    std::vector<std::pair<std::size_t, std::size_t>> branch_nodes_;
};

/// Net load injection current of every slot at the given voltages.
std::vector<Phasor> load_injections(const NetworkModel& net, std::span<const double> v_all);

/// KCL residuals of the network in p.u.
///
/// `injections` holds the net injection current (loads minus generators) of
/// each node/phase slot; it must have node_phase_count() entries.
/// Returns 2 reals per slot (real row, imaginary row).
std::vector<double> kcl_residual(const NetworkModel& net, std::span<const double> v_all,
                                 std::span<const Phasor> injections);

}  // namespace tsbi::net
