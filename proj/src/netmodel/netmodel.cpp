#include "tsbi/netmodel.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "tsbi/errors.hpp"

namespace tsbi::net {

char phase_letter(Phase p) { return "abc"[static_cast<int>(p)]; }

Phase parse_phase(char c) {
    switch (c) {
        case 'a': case 'A': return Phase::A;
        case 'b': case 'B': return Phase::B;
        case 'c': case 'C': return Phase::C;
        default: throw InputError(std::string("unknown phase '") + c + "'");
    }
}

PhaseSet parse_phase_set(const std::string& s) {
    PhaseSet set{false, false, false};
    for (char c : s) {
        const int k = static_cast<int>(parse_phase(c));
        if (set[k]) throw InputError("duplicate phase in '" + s + "'");
        set[k] = true;
    }
    if (!set[0] && !set[1] && !set[2]) throw InputError("empty phase set");
    return set;
}

std::string format_phase_set(const PhaseSet& s) {
    std::string out;
    for (int k = 0; k < 3; ++k)
        if (s[k]) out += "abc"[k];
    return out;
}

void PerUnitBase::validate() const {
    if (!(s_base > 0.0) || !(v_base > 0.0) || !(freq > 0.0))
        throw InputError("per-unit bases must be strictly positive");
}

Phasor load_current(const Phasor& v, double p, double q, double eps_v) {
    if (!is_finite(v) || !std::isfinite(p) || !std::isfinite(q) || !std::isfinite(eps_v))
        throw InputError("load_current: non-finite input");
    if (!(norm2(v) + eps_v > 0.0)) throw InputError("load_current: zero voltage without regularization");
    return load_injection_current(v, p, q, eps_v);
}

Phasor net_injection(std::span<const PowerInjection> loads, std::span<const PowerInjection> gens,
                     const Phasor& v, double eps_v) {
    Phasor total;
    for (const auto& l : loads) total += load_current(v, l.p, l.q, eps_v);
    for (const auto& g : gens) total -= load_current(v, g.p, g.q, eps_v);
    return total;
}

NetworkModel::NetworkModel(PerUnitBase base, std::vector<NodeSpec> nodes,
                           std::vector<BranchSpec> branches, std::vector<LoadSpec> loads,
                           double eps_v)
    : base_(base),
      nodes_(std::move(nodes)),
      branches_(std::move(branches)),
      loads_(std::move(loads)),
      eps_v_(eps_v) {
    base_.validate();
    if (!(eps_v_ >= 0.0)) throw InputError("eps_v must be non-negative");

    slots_.reserve(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const auto& node = nodes_[n];
        if (node.id.empty()) throw InputError("node with empty id");
        if (!index_.emplace(node.id, n).second) throw InputError("duplicate node id '" + node.id + "'");
        std::array<long, 3> s{-1, -1, -1};
        std::size_t declared = 0;
        for (int k = 0; k < 3; ++k) {
            if (!node.phases[k]) continue;
            s[k] = static_cast<long>(slot_count_++);
            slot_owner_.emplace_back(n, static_cast<Phase>(k));
            ++declared;
        }
        if (declared == 0) throw InputError("node '" + node.id + "' declares no phases");
        if (node.kind == NodeKind::Slack) {
            if (node.slack_voltage.size() != declared)
                throw InputError("slack node '" + node.id + "' needs one voltage per declared phase");
            for (const auto& v : node.slack_voltage)
                if (!is_finite(v)) throw InputError("slack node '" + node.id + "' has non-finite voltage");
        } else if (!node.slack_voltage.empty()) {
            throw InputError("load node '" + node.id + "' must not carry slack voltages");
        }
        slots_.push_back(s);
    }

    slack_.assign(slot_count_, false);
    slack_v_.assign(slot_count_, Phasor{});
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        if (nodes_[n].kind != NodeKind::Slack) continue;
        std::size_t j = 0;
        for (int k = 0; k < 3; ++k) {
            if (slots_[n][k] < 0) continue;
            slack_[slots_[n][k]] = true;
            slack_v_[slots_[n][k]] = nodes_[n].slack_voltage[j++];
        }
    }

    incidence_.resize(nodes_.size());
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const auto& br = branches_[b];
        const std::size_t i = node_index(br.from);
        const std::size_t j = node_index(br.to);
        if (i == j) throw InputError("branch connects node '" + br.from + "' to itself");
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                const double g = br.g_block[r][c];
                const double bb = br.b_block[r][c];
                if (!std::isfinite(g) || !std::isfinite(bb))
                    throw InputError("branch " + br.from + "-" + br.to + " has non-finite admittance");
                const bool present = slots_[i][r] >= 0 && slots_[j][r] >= 0 && slots_[i][c] >= 0 &&
                                     slots_[j][c] >= 0;
                if (!present && (g != 0.0 || bb != 0.0))
                    throw InputError("branch " + br.from + "-" + br.to +
                                     " has admittance on a phase missing at an endpoint");
            }
        }
        branch_nodes_.emplace_back(i, j);
        incidence_[i].push_back({b, j, true});
        incidence_[j].push_back({b, i, false});
    }

    slot_loads_.resize(slot_count_);
    for (const auto& l : loads_) {
        const std::size_t n = node_index(l.node);
        if (slots_[n][static_cast<int>(l.phase)] < 0)
            throw InputError(std::string("load on missing phase ") + phase_letter(l.phase) + " of node '" +
                             l.node + "'");
        if (!std::isfinite(l.p) || !std::isfinite(l.q)) throw InputError("load with non-finite power");
        slot_loads_[slot(n, l.phase) / 2].push_back({l.p / base_.s_base, l.q / base_.s_base});
    }
}

std::size_t NetworkModel::node_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown node id '" + id + "'");
    return it->second;
}

bool NetworkModel::has_phase(std::size_t node, Phase ph) const {
    return slots_.at(node)[static_cast<int>(ph)] >= 0;
}

std::size_t NetworkModel::slot(std::size_t node, Phase ph) const {
    const long s = slots_.at(node)[static_cast<int>(ph)];
    if (s < 0)
        throw InputError(std::string("phase ") + phase_letter(ph) + " not present at node '" + nodes_[node].id +
                         "'");
    return 2 * static_cast<std::size_t>(s);
}

Phasor NetworkModel::branch_current(std::size_t branch, std::span<const double> v_all, Phase ph) const {
    const auto& br = branches_.at(branch);
    const auto [i, j] = branch_nodes_[branch];
    const int r = static_cast<int>(ph);
    Phasor out;
    for (int c = 0; c < 3; ++c) {
        if (slots_[i][c] < 0 || slots_[j][c] < 0) continue;
        const std::size_t si = 2 * slots_[i][c];
        const std::size_t sj = 2 * slots_[j][c];
        const double dr = v_all[si] - v_all[sj];
        const double di = v_all[si + 1] - v_all[sj + 1];
        out.re += br.g_block[r][c] * dr - br.b_block[r][c] * di;
        out.im += br.g_block[r][c] * di + br.b_block[r][c] * dr;
    }
    return out;
}

std::vector<double> NetworkModel::flat_start() const {
    std::vector<double> v(state_size(), 0.0);
    constexpr double shift = 2.0 * std::numbers::pi / 3.0;
    for (std::size_t s = 0; s < slot_count_; ++s) {
        Phasor x = slack_[s] ? slack_v_[s] : from_polar(1.0, -shift * static_cast<int>(slot_owner_[s].second));
        v[2 * s] = x.re;
        v[2 * s + 1] = x.im;
    }
    return v;
}

std::vector<Phasor> load_injections(const NetworkModel& net, std::span<const double> v_all) {
    std::vector<Phasor> out(net.node_phase_count());
    for (std::size_t s = 0; s < out.size(); ++s) {
        const Phasor v = net.voltage(v_all, s);
        for (const auto& l : net.slot_loads(s)) out[s] += load_injection_current(v, l.p, l.q, net.eps_v());
    }
    return out;
}

std::vector<double> kcl_residual(const NetworkModel& net, std::span<const double> v_all,
                                 std::span<const Phasor> injections) {
    if (v_all.size() != net.state_size())
        throw InputError("kcl_residual: state has " + std::to_string(v_all.size()) + " entries, expected " +
                         std::to_string(net.state_size()));
    if (injections.size() != net.node_phase_count())
        throw InputError("kcl_residual: injection vector size mismatch");

    std::vector<double> r(net.state_size(), 0.0);
    for (std::size_t s = 0; s < net.node_phase_count(); ++s) {
        if (net.is_slack_slot(s)) {
            const Phasor v = net.voltage(v_all, s);
            r[2 * s] = v.re - net.slack_voltage(s).re;
            r[2 * s + 1] = v.im - net.slack_voltage(s).im;
            continue;
        }
        const auto [node, ph] = net.slot_owner(s);
        Phasor sum = injections[s];
        for (const auto& inc : net.incidences(node)) {
            const Phasor ib = net.branch_current(inc.branch, v_all, ph);
            sum += inc.is_from ? ib : -ib;
        }
        r[2 * s] = sum.re;
        r[2 * s + 1] = sum.im;
    }
    return r;
}

}  // namespace tsbi::net
