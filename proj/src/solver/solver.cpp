#include "tsbi/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tsbi/dual.hpp"
#include "tsbi/errors.hpp"
#include "tsbi/log.hpp"

namespace tsbi::solve {

using inverter::BasicTsbiState;
using inverter::TsbiState;

void SolverOptions::validate() const {
    if (!(tol_inf > 0.0)) throw InputError("solver: tol_inf must be positive");
    if (max_iter < 1) throw InputError("solver: max_iter must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw InputError("solver: damping must be in (0, 1]");
    if (!(step_limit_v > 0.0)) throw InputError("solver: step_limit_v must be positive");
}

double InverterResult::efficiency() const {
    if (p_t1 > 0.0) return p_t2 / p_t1;
    if (p_t2 < 0.0) return p_t1 / p_t2;
    return 0.0;
}

PowerFlowSystem::PowerFlowSystem(const net::NetworkModel& net, std::vector<InverterSpec> inverters)
    : net_(net), specs_(std::move(inverters)) {
    slot_inverters_.resize(net_.node_phase_count());
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const auto& s = specs_[k];
        for (std::size_t j = 0; j < k; ++j)
            if (specs_[j].id == s.id) throw InputError("duplicate inverter id '" + s.id + "'");
        s.params.validate();
        s.control.validate_for(s.der);
        std::visit(
            [](const auto& d) {
                if constexpr (std::is_same_v<std::decay_t<decltype(d)>, der::BatteryDer>)
                    d.params.validate();
                else
                    d.params.validate();
            },
            s.der);
        const std::size_t node = net_.node_index(s.node);
        if (!net_.has_phase(node, s.phase))
            throw InputError("inverter '" + s.id + "' attaches to a missing phase of node '" + s.node + "'");
        const std::size_t t = net_.slot(node, s.phase);
        terminal_.push_back(t);
        slot_inverters_[t / 2].push_back(k);
        models_.push_back({s.params, s.der, s.control, net_.base().v_base, net_.eps_v()});
    }
    size_ = net_.state_size() + 16 * specs_.size();
    row_scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(size_));
    col_scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(size_));
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const auto rs = inverter::row_scales(models_[k]);
        const auto cs = inverter::column_scales(specs_[k].params);
        for (int j = 0; j < 16; ++j) {
            row_scale_[static_cast<Eigen::Index>(inverter_offset(k) + j)] = rs[j];
            col_scale_[static_cast<Eigen::Index>(inverter_offset(k) + j)] = cs[j];
        }
    }
}

TsbiState PowerFlowSystem::inverter_state(const std::vector<double>& x, std::size_t k) const {
    return TsbiState::unpack(x.data() + inverter_offset(k));
}

Phasor PowerFlowSystem::terminal_voltage(const std::vector<double>& x, std::size_t k) const {
    const double vb = net_.base().v_base;
    return {x[terminal_[k]] * vb, x[terminal_[k] + 1] * vb};
}

std::vector<double> PowerFlowSystem::residual(const std::vector<double>& x) const {
    if (x.size() != size_) throw InputError("residual: state size mismatch");
    const std::span<const double> v(x.data(), net_.state_size());
    auto inj = net::load_injections(net_, v);
    const double ib = net_.base().i_base();
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const std::size_t o = inverter_offset(k);
        inj[terminal_[k] / 2] -= Phasor{x[o + 12] / ib, x[o + 13] / ib};
    }
    auto r = net::kcl_residual(net_, v, inj);
    r.resize(size_);
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const auto blk = inverter::assemble_inverter_block(models_[k], inverter_state(x, k), terminal_voltage(x, k));
        std::copy(blk.begin(), blk.end(), r.begin() + static_cast<long>(inverter_offset(k)));
    }
    return r;
}

std::vector<double> PowerFlowSystem::scaled_residual(const std::vector<double>& x) const {
    auto r = residual(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] /= row_scale_[static_cast<Eigen::Index>(i)];
    return r;
}

double PowerFlowSystem::residual_norm(const std::vector<double>& x) const {
    double m = 0.0;
    for (double v : scaled_residual(x)) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

Eigen::SparseMatrix<double> PowerFlowSystem::jacobian(const std::vector<double>& x) const {
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> t;
    t.reserve(size_ * 12);
    auto add = [&](std::size_t r, std::size_t c, double v) {
        if (v != 0.0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    };

    const double ib = net_.base().i_base();
    for (std::size_t s = 0; s < net_.node_phase_count(); ++s) {
        const std::size_t rr = 2 * s, ri = 2 * s + 1;
        if (net_.is_slack_slot(s)) {
            add(rr, rr, 1.0);
            add(ri, ri, 1.0);
            continue;
        }
        const auto [node, ph] = net_.slot_owner(s);
        const int r = static_cast<int>(ph);
        for (const auto& inc : net_.incidences(node)) {
            const auto& br = net_.branches()[inc.branch];
            for (int c = 0; c < 3; ++c) {
                const auto cp = static_cast<net::Phase>(c);
                if (!net_.has_phase(node, cp) || !net_.has_phase(inc.other, cp)) continue;
                const double g = br.g_block[r][c], b = br.b_block[r][c];
                for (const auto& [col, sign] : {std::pair{net_.slot(node, cp), 1.0},
                                                 std::pair{net_.slot(inc.other, cp), -1.0}}) {
                    add(rr, col, sign * g);
                    add(rr, col + 1, -sign * b);
                    add(ri, col, sign * b);
                    add(ri, col + 1, sign * g);
                }
            }
        }
        if (!net_.slot_loads(s).empty()) {
            using D = Dual<2>;
            const BasicPhasor<D> v{D::variable(x[rr], 0), D::variable(x[ri], 1)};
            BasicPhasor<D> sum{D(0.0), D(0.0)};
            for (const auto& l : net_.slot_loads(s)) sum += net::load_injection_current(v, l.p, l.q, net_.eps_v());
            add(rr, rr, sum.re.d[0]);
            add(rr, ri, sum.re.d[1]);
            add(ri, rr, sum.im.d[0]);
            add(ri, ri, sum.im.d[1]);
        }
        for (std::size_t k : slot_inverters_[s]) {
            const std::size_t o = inverter_offset(k);
            add(rr, o + 12, -1.0 / ib);
            add(ri, o + 13, -1.0 / ib);
        }
    }

    using D = Dual<18>;
    const double vb = net_.base().v_base;
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const std::size_t o = inverter_offset(k);
        std::array<D, 16> vars;
        for (int j = 0; j < 16; ++j) vars[j] = D::variable(x[o + j], j);
        const auto st = BasicTsbiState<D>::unpack(vars);
        const BasicPhasor<D> vt{D::variable(x[terminal_[k]] * vb, 16), D::variable(x[terminal_[k] + 1] * vb, 17)};
        const auto blk = inverter::assemble_inverter_block(models_[k], st, vt);
        for (int i = 0; i < 16; ++i) {
            for (int j = 0; j < 16; ++j) add(o + i, o + j, blk[i].d[j]);
            add(o + i, terminal_[k], blk[i].d[16] * vb);
            add(o + i, terminal_[k] + 1, blk[i].d[17] * vb);
        }
    }

    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(size_));
    J.setFromTriplets(t.begin(), t.end());
    return J;
}

std::string PowerFlowSystem::equation_label(std::size_t row) const {
    if (row < net_.state_size()) {
        const auto [node, ph] = net_.slot_owner(row / 2);
        const std::string kind = net_.is_slack_slot(row / 2) ? "slack" : "kcl";
        return kind + (row % 2 ? ".im[" : ".re[") + net_.nodes()[node].id + "." + net::phase_letter(ph) + "]";
    }
    const std::size_t k = (row - net_.state_size()) / 16;
    return "inverter[" + specs_[k].id + "]." + inverter::equation_names()[(row - net_.state_size()) % 16];
}

std::string PowerFlowSystem::variable_label(std::size_t col) const {
    if (col < net_.state_size()) {
        const auto [node, ph] = net_.slot_owner(col / 2);
        return std::string(col % 2 ? "v.im[" : "v.re[") + net_.nodes()[node].id + "." + net::phase_letter(ph) + "]";
    }
    const std::size_t k = (col - net_.state_size()) / 16;
    return "inverter[" + specs_[k].id + "]." + inverter::state_names()[(col - net_.state_size()) % 16];
}

namespace {

double setpoint_p(const InverterSpec& s) {
    if (const auto* cp = std::get_if<ctrl::ConstantP>(&s.control.p_law)) return cp->p_set;
    // MPPT: lossless estimate from a coarse sweep
    return der::sweep_mpp(std::get<der::PvDer>(s.der).params, 50).p_mp;
}

double setpoint_q(const InverterSpec& s, double p, double v_mag_pu) {
    const auto& q = s.control.q_law;
    if (const auto* cq = std::get_if<ctrl::ConstantQ>(&q)) return cq->q_set;
    if (const auto* pf = std::get_if<ctrl::ConstantPF>(&q)) {
        const double sign = pf->sign == ctrl::PfSign::Lagging ? 1.0 : -1.0;
        return sign * p * std::sqrt(1.0 - pf->pf * pf->pf) / pf->pf;
    }
    return ctrl::voltvar_q(std::get<ctrl::VoltVar>(q), v_mag_pu);
}

// PV voltage on the high-voltage side of the MPP that delivers p_dc.
double pv_voltage_for_power(const der::PvParams& p, double p_dc) {
    const auto mpp = der::sweep_mpp(p, 50);
    if (p_dc >= mpp.p_mp) return mpp.v_mp;
    double lo = mpp.v_mp, hi = der::pv_open_circuit_voltage(p);
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid * der::pv_current(p, mid) > p_dc ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> PowerFlowSystem::initial_state(InitMode mode) const {
    std::vector<double> x = net_.flat_start();
    x.resize(size_, 0.0);
    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const auto& s = specs_[k];
        const auto& p = s.params;
        const Phasor v = terminal_voltage(x, k);
        const double vmag = magnitude(v);
        const double p_set = setpoint_p(s);
        const double q_set = setpoint_q(s, p_set, vmag / net_.base().v_base);

        TsbiState st;
        st.p_ctrl = p_set;
        st.q_ctrl = q_set;
        if (mode == InitMode::Flat) {
            const Phasor u{v.re / vmag, v.im / vmag};
            st.d = 0.5;
            st.m_r = 0.8 * u.re;
            st.m_i = 0.8 * u.im;
            st.v_ac = Phasor{st.m_r, st.m_i} * (p.v_dc / inverter::kSqrt2);
            st.v_m = v;
            if (const auto* b = std::get_if<der::BatteryDer>(&s.der))
                st.v_t1 = der::open_circuit_voltage(b->params, b->state.soc);
            else
                st.v_t1 = der::sweep_mpp(std::get<der::PvDer>(s.der).params, 50).v_mp;
        } else {
            // Lossless chain from the T2 setpoints back to T1.
            const auto& l = p.lcl;
            st.i_t2 = ctrl::ctrl_current(v, p_set, q_set, net_.eps_v() * net_.base().v_base * net_.base().v_base);
            st.v_m = v + Phasor{l.r2, l.omega * l.l2} * st.i_t2;
            st.i_ac = inverter::lcl_capacitor_current(l, st.v_m) + st.i_t2;
            st.v_ac = st.v_m + Phasor{l.r1, l.omega * l.l1} * st.i_ac;
            Phasor m = st.v_ac * (inverter::kSqrt2 / p.v_dc);
            const double mm = magnitude(m);
            if (mm > 0.98) m = m * (0.98 / mm);
            st.m_r = m.re;
            st.m_i = m.im;
            st.i_dc = dot(st.v_ac, st.i_ac) / p.v_dc;
            const double p_dc = p.v_dc * st.i_dc;
            if (const auto* b = std::get_if<der::BatteryDer>(&s.der)) {
                double i = 0.0;
                try {
                    i = der::battery_current_for_power(b->params, b->state.soc, p_dc);
                } catch (const NumericalError&) {
                    i = der::battery_current_for_power(b->params, b->state.soc, 0.0);
                }
                st.i_t1 = i;
                st.v_t1 = der::battery_terminal_voltage(b->params, b->state.soc, i);
            } else {
                const auto& pv = std::get<der::PvDer>(s.der).params;
                st.v_t1 = pv_voltage_for_power(pv, p_dc);
                st.i_t1 = der::pv_current(pv, st.v_t1);
            }
            st.d = std::clamp(p.v_dc / (st.v_t1 + p.v_dc), 0.02, 0.98);
        }
        const auto packed = st.pack();
        std::copy(packed.begin(), packed.end(), x.begin() + static_cast<long>(inverter_offset(k)));
    }
    return x;
}

InverterResult PowerFlowSystem::inverter_result(const std::vector<double>& x, std::size_t k) const {
    InverterResult r;
    r.id = specs_[k].id;
    r.state = inverter_state(x, k);
    r.v_t2 = terminal_voltage(x, k);
    r.p_t1 = inverter::power_t1(r.state);
    r.p_t2 = inverter::power_t2(r.state, r.v_t2);
    r.q_t2 = inverter::reactive_t2(r.state, r.v_t2);
    r.losses = inverter::loss_breakdown(specs_[k].params, r.state);
    return r;
}

Eigen::MatrixXd finite_diff_jacobian(const PowerFlowSystem& sys, const std::vector<double>& x, double h) {
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::MatrixXd J(n, n);
    std::vector<double> xp = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double step = h * sys.col_scale()[j];
        xp[j] = x[j] + step;
        const auto fp = sys.residual(xp);
        xp[j] = x[j] - step;
        const auto fm = sys.residual(xp);
        xp[j] = x[j];
        for (Eigen::Index i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * step);
    }
    return J;
}

std::vector<double> initialize_state(const PowerFlowSystem& sys, InitMode mode) { return sys.initial_state(mode); }

namespace {

// Linear solver over the scaled Jacobian, dense for small systems.
class ScaledSolver {
  public:
    ScaledSolver(const PowerFlowSystem& sys, const std::vector<double>& x) : sys_(sys) {
        Eigen::SparseMatrix<double> J = sys.jacobian(x);
        const Eigen::VectorXd rinv = sys.row_scale().cwiseInverse();
        J = rinv.asDiagonal() * J * sys.col_scale().asDiagonal();
        if (J.rows() <= 64) {
            dense_ = Eigen::MatrixXd(J);
            // PartialPivLU does not report singularity; probe the pivots.
            Eigen::FullPivLU<Eigen::MatrixXd> probe(*dense_);
            if (probe.rank() < dense_->rows()) {
                error_ = diagnose(J, "rank " + std::to_string(probe.rank()) + " < " + std::to_string(J.rows()));
                return;
            }
            lu_dense_.compute(*dense_);
        } else {
            J.makeCompressed();
            lu_.analyzePattern(J);
            lu_.factorize(J);
            if (lu_.info() != Eigen::Success) error_ = diagnose(J, lu_.lastErrorMessage());
        }
    }

    bool ok() const { return error_.empty(); }
    const std::string& error() const { return error_; }

    /// Solves J dx = rhs (unscaled rhs, unscaled dx).
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        const Eigen::VectorXd b = rhs.cwiseQuotient(sys_.row_scale());
        const Eigen::VectorXd y = dense_ ? Eigen::VectorXd(lu_dense_.solve(b)) : Eigen::VectorXd(lu_.solve(b));
        return y.cwiseProduct(sys_.col_scale());
    }

  private:
    std::string diagnose(const Eigen::SparseMatrix<double>& J, const std::string& what) const {
        std::vector<bool> row_nz(J.rows(), false), col_nz(J.cols(), false);
        for (Eigen::Index c = 0; c < J.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it)
                if (it.value() != 0.0) {
                    row_nz[it.row()] = true;
                    col_nz[it.col()] = true;
                }
        for (Eigen::Index i = 0; i < J.rows(); ++i)
            if (!row_nz[i]) return "singular Jacobian: empty row " + sys_.equation_label(i);
        for (Eigen::Index j = 0; j < J.cols(); ++j)
            if (!col_nz[j]) return "singular Jacobian: empty column " + sys_.variable_label(j);
        return "singular Jacobian: " + what;
    }

    const PowerFlowSystem& sys_;
    std::optional<Eigen::MatrixXd> dense_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_dense_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::string error_;
};

// Keeps the iterate inside the smooth region; returns true if |m| was clamped.
bool project(const PowerFlowSystem& sys, std::vector<double>& x) {
    bool clamped = false;
    for (std::size_t k = 0; k < sys.inverters().size(); ++k) {
        const std::size_t o = sys.inverter_offset(k);
        x[o + 2] = std::clamp(x[o + 2], 0.02, 0.98);
        const double m = std::hypot(x[o + 4], x[o + 5]);
        if (m > 1.0) {
            x[o + 4] /= m;
            x[o + 5] /= m;
            clamped = true;
        }
    }
    return clamped;
}

}  // namespace

SolveReport solve_power_flow(const PowerFlowSystem& sys, const SolverOptions& opts, const std::vector<double>* x0) {
    opts.validate();
    SolveReport rep;
    std::vector<double> x = (!opts.flat_start && x0) ? *x0 : sys.initial_state(opts.init);
    if (x.size() != sys.size()) throw InputError("initial state has the wrong size");
    project(sys, x);

    const std::size_t nv = sys.network().state_size();
    double norm = sys.residual_norm(x);
    rep.residual_history.push_back(norm);
    rep.trace.push_back({0, norm, 0.0, 0.0});
    log::debug("newton iter 0 residual " + std::to_string(norm));

    for (int it = 1; it <= opts.max_iter && !(norm < opts.tol_inf); ++it) {
        if (!std::isfinite(norm)) {
            rep.message = "non-finite residual";
            break;
        }
        ScaledSolver lin(sys, x);
        if (!lin.ok()) {
            rep.message = lin.error();
            break;
        }
        const auto f = sys.residual(x);
        const Eigen::VectorXd dx = lin.solve(-Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())));
        if (!dx.allFinite()) {
            rep.message = "non-finite Newton step";
            break;
        }

        double max_dv = 0.0;
        for (std::size_t s = 0; s < nv; s += 2) max_dv = std::max(max_dv, std::hypot(dx[s], dx[s + 1]));
        double t = opts.damping;
        if (max_dv * t > opts.step_limit_v) t = opts.step_limit_v / max_dv;

        bool accepted = false;
        std::vector<double> xt(x.size());
        for (int bt = 0; bt <= 20; ++bt) {
            for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + t * dx[static_cast<Eigen::Index>(i)];
            const bool clamped = project(sys, xt);
            const double nt = sys.residual_norm(xt);
            if (nt <= norm) {
                accepted = true;
                if (clamped) ++rep.modulation_clamps;
                double step = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i)
                    step = std::max(step, std::abs(xt[i] - x[i]) / sys.col_scale()[static_cast<Eigen::Index>(i)]);
                x.swap(xt);
                norm = nt;
                rep.trace.push_back({it, norm, step, t});
                break;
            }
            t *= 0.5;
        }
        rep.iterations = it;
        if (!accepted) {
            rep.message = "line search failed to reduce the residual";
            break;
        }
        rep.residual_history.push_back(norm);
        log::debug("newton iter " + std::to_string(it) + " residual " + std::to_string(norm) + " damping " +
                   std::to_string(t));
    }

    rep.converged = norm < opts.tol_inf;
    if (!rep.converged && rep.message.empty()) rep.message = "iteration limit reached";
    if (rep.modulation_clamps > 0) {
        const auto msg = "modulation magnitude clamped to 1 in " + std::to_string(rep.modulation_clamps) + " iterations";
        rep.converged ? log::info(msg) : log::warn(msg);
    }
    rep.state = x;
    for (std::size_t k = 0; k < sys.inverters().size(); ++k) rep.inverters.push_back(sys.inverter_result(x, k));
    return rep;
}

SolveReport solve_power_flow(const net::NetworkModel& net, const std::vector<InverterSpec>& inverters,
                             const SolverOptions& opts) {
    const PowerFlowSystem sys(net, inverters);
    return solve_power_flow(sys, opts);
}

std::vector<double> setpoint_sensitivity(const PowerFlowSystem& sys, const std::vector<double>& x, std::size_t k) {
    if (!std::holds_alternative<ctrl::ConstantP>(sys.inverters().at(k).control.p_law))
        throw InputError("setpoint sensitivity needs a constant-P inverter");
    ScaledSolver lin(sys, x);
    if (!lin.ok()) throw NumericalError(lin.error());
    // d/dp_set of (p_ctrl - p_set) is -1, so J dx = e_row.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.size()));
    rhs[static_cast<Eigen::Index>(sys.inverter_offset(k) + 14)] = 1.0;
    const Eigen::VectorXd dx = lin.solve(rhs);
    return {dx.data(), dx.data() + dx.size()};
}

PowerFlowSystem single_inverter_system(const InverterSpec& inv, const net::PerUnitBase& base, Phasor v_t2_pu) {
    net::NodeSpec node;
    node.id = inv.node.empty() ? "grid" : inv.node;
    node.phases = {false, false, false};
    node.phases[static_cast<int>(inv.phase)] = true;
    node.kind = net::NodeKind::Slack;
    node.slack_voltage = {v_t2_pu};
    net::NetworkModel net(base, {node}, {}, {});
    InverterSpec s = inv;
    s.node = node.id;
    return PowerFlowSystem(net, {s});
}

JacobianCheck check_jacobian(const PowerFlowSystem& sys, const std::vector<double>& x) {
    const Eigen::MatrixXd ja(sys.jacobian(x));
    const Eigen::MatrixXd jf = (4.0 * finite_diff_jacobian(sys, x, 5e-7) - finite_diff_jacobian(sys, x, 1e-6)) / 3.0;
    const Eigen::RowVectorXd cs = sys.col_scale().transpose();
    JacobianCheck out;
    for (Eigen::Index i = 0; i < ja.rows(); ++i) {
        const double scale = ja.row(i).cwiseAbs().cwiseProduct(cs).maxCoeff();
        const double err = (ja.row(i) - jf.row(i)).cwiseAbs().cwiseProduct(cs).maxCoeff();
        const double rel = scale > 0.0 ? err / scale : err;
        if (i == 0 || rel > out.max_rel_error) {
            out.max_rel_error = rel;
            out.worst_row = sys.equation_label(static_cast<std::size_t>(i));
        }
    }
    return out;
}

std::vector<double> random_state(const PowerFlowSystem& sys, const std::vector<double>& x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> y = x;
    auto phasor = [&](std::size_t i) {
        const double s = 1.0 + 0.05 * u(rng), a = 0.05 * u(rng);
        const double re = y[i], im = y[i + 1];
        y[i] = s * (re * std::cos(a) - im * std::sin(a));
        y[i + 1] = s * (re * std::sin(a) + im * std::cos(a));
    };
    for (std::size_t i = 0; i < sys.network().state_size(); i += 2) phasor(i);
    for (std::size_t k = 0; k < sys.inverters().size(); ++k) {
        const std::size_t o = sys.inverter_offset(k);
        for (std::size_t j : {0, 1, 3, 14, 15}) y[o + j] *= 1.0 + 0.1 * u(rng);
        y[o + 2] = std::clamp(y[o + 2] + 0.1 * u(rng), 0.1, 0.9);
        phasor(o + 4);
        const double mag = std::hypot(y[o + 4], y[o + 5]);
        if (mag > 0.95) {
            y[o + 4] *= 0.95 / mag;
            y[o + 5] *= 0.95 / mag;
        }
        for (std::size_t j : {6, 8, 10, 12}) phasor(o + j);
    }
    return y;
}

}  // namespace tsbi::solve
