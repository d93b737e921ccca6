#include "tsbi/shell.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>

#include "tsbi/csv.hpp"
#include "tsbi/errors.hpp"
#include "tsbi/fixtures.hpp"
#include "tsbi/log.hpp"

namespace tsbi::shell {

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

// Maps library exceptions to exit codes and reports them once on stderr.
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        log::error(std::string("input error: ") + e.what());
        return kInputError;
    } catch (const IoError& e) {
        log::error(std::string("i/o error: ") + e.what());
        return kInputError;
    } catch (const der::SocBoundViolation& e) {
        log::error(std::string("input error: ") + e.what());
        return kInputError;
    } catch (const NumericalError& e) {
        log::error(std::string("numerical failure: ") + e.what());
        return kNonConvergence;
    } catch (const InvariantError& e) {
        log::error(std::string("invariant violated: ") + e.what());
        return kInvariantViolation;
    }
}

inverter::TsbiParams params_from(const std::string& path) {
    return path.empty() ? inverter::default_params() : parse_params(read_file(path));
}

void loss_cells(CsvWriter& w, const inverter::LossBreakdown& l) {
    w.cell(l.fsc_switching).cell(l.fsc_conduction).cell(l.ssc_switching).cell(l.ssc_reverse_recovery);
    w.cell(l.ssc_conduction).cell(l.lcl_resistive).cell(l.total());
}

}  // namespace

void apply_overrides(ScenarioFile& s, const Overrides& o) {
    if (o.tol) s.solver.tol_inf = *o.tol;
    if (o.max_iter) s.solver.max_iter = *o.max_iter;
    for (auto& inv : s.inverters) {
        if (o.eps_sgn) inv.params.eps_sgn = *o.eps_sgn;
        if (auto* vv = std::get_if<ctrl::VoltVar>(&inv.control.q_law); vv && o.eps_vv) vv->eps_vv = *o.eps_vv;
    }
    s.solver.validate();
    for (const auto& inv : s.inverters) {
        inv.params.validate();
        inv.control.validate();
    }
}

// ---------------------------------------------------------------- pf

PfResult run_pf(const ScenarioFile& s) {
    const auto net = s.network();
    const solve::PowerFlowSystem sys(net, s.inverters);
    PfResult out;
    out.report = solve::solve_power_flow(sys, s.solver);
    const auto& x = out.report.state;

    CsvWriter v({"node", "phase", "v_re_pu", "v_im_pu", "v_mag_pu", "angle_deg"});
    for (std::size_t slot = 0; slot < net.node_phase_count(); ++slot) {
        const auto [node, ph] = net.slot_owner(slot);
        const Phasor p = net.voltage(x, slot);
        v.cell(net.nodes()[node].id).cell(std::string_view(&"abc"[static_cast<int>(ph)], 1));
        v.cell(p.re).cell(p.im).cell(std::hypot(p.re, p.im)).cell(std::atan2(p.im, p.re) * 180.0 / std::numbers::pi);
        v.end_row();
    }
    out.voltages_csv = v.str();

    CsvWriter w({"id", "node", "phase", "p_t1_w", "p_t2_w", "q_t2_var", "v_t2_mag_pu", "eta", "d", "m_mag",
                 "fsc_switching_w", "fsc_conduction_w", "ssc_switching_w", "ssc_reverse_recovery_w",
                 "ssc_conduction_w", "lcl_w", "loss_total_w", "audit_mismatch_w"});
    for (std::size_t k = 0; k < out.report.inverters.size(); ++k) {
        const auto& r = out.report.inverters[k];
        const auto& spec = s.inverters[k];
        w.cell(r.id).cell(spec.node).cell(std::string_view(&"abc"[static_cast<int>(spec.phase)], 1));
        w.cell(r.p_t1).cell(r.p_t2).cell(r.q_t2).cell(std::hypot(r.v_t2.re, r.v_t2.im) / s.base.v_base);
        w.cell(r.efficiency()).cell(r.state.d).cell(std::hypot(r.state.m_r, r.state.m_i));
        loss_cells(w, r.losses);
        w.cell(r.audit_mismatch());
        w.end_row();
        if (out.report.converged) {
            if (std::abs(r.audit_mismatch()) > 1e-6 * std::max(1.0, std::abs(r.p_t1)))
                out.violations.push_back(r.id + ": energy audit mismatch " + format_double(r.audit_mismatch()) + " W");
            if (r.losses.min_component() < -1e-9)
                out.violations.push_back(r.id + ": negative loss component " + format_double(r.losses.min_component()));
        }
    }
    out.inverters_csv = w.str();

    CsvWriter t({"iter", "residual_inf", "step_norm", "damping"});
    for (const auto& row : out.report.trace) {
        t.cell(row.iter).cell(row.residual_inf).cell(row.step_norm).cell(row.damping);
        t.end_row();
    }
    out.trace_csv = t.str();
    return out;
}

int cmd_pf(const std::string& scenario_path, const std::string& out_dir, const Overrides& o) {
    return guarded([&] {
        auto s = parse_scenario(read_file(scenario_path));
        apply_overrides(s, o);
        const auto r = run_pf(s);
        ensure_dir(out_dir);
        write_file(join(out_dir, "voltages.csv"), r.voltages_csv);
        write_file(join(out_dir, "inverters.csv"), r.inverters_csv);
        write_file(join(out_dir, "trace.csv"), r.trace_csv);
        if (!r.report.converged) {
            log::error("power flow did not converge after " + std::to_string(r.report.iterations) +
                       " iterations: " + r.report.message);
            return static_cast<int>(kNonConvergence);
        }
        for (const auto& v : r.violations) log::error("post-check: " + v);
        log::info("power flow converged in " + std::to_string(r.report.iterations) + " iterations");
        return static_cast<int>(r.violations.empty() ? kOk : kInvariantViolation);
    });
}

// ---------------------------------------------------------------- sweep

SweepResult run_sweep(const inverter::TsbiParams& params, double v_dc_source, const SweepSpec& spec, int threads) {
    SweepResult r;
    const double s = params.s_rated;
    const bool default_p = spec.p_min == 0.0 && spec.p_max == 0.0;
    const bool default_q = spec.q_min == 0.0 && spec.q_max == 0.0;
    r.p_values = solve::linspace(default_p ? 0.02 * s : spec.p_min, default_p ? s : spec.p_max, spec.np);
    r.q_values = solve::linspace(default_q ? -0.4 * s : spec.q_min, default_q ? 0.4 * s : spec.q_max, spec.nq);
    r.points = solve::sweep_efficiency(params, solve::ideal_dc_source(v_dc_source), r.p_values, r.q_values, {}, threads);
    CsvWriter w({"p_w", "q_var", "eta", "p_t1_w", "p_t2_w", "q_t2_var", "fsc_switching_w", "fsc_conduction_w",
                 "ssc_switching_w", "ssc_reverse_recovery_w", "ssc_conduction_w", "lcl_w", "loss_total_w",
                 "converged", "iterations"});
    for (const auto& op : r.points) {
        w.cell(op.p_set).cell(op.q_set).cell(op.efficiency()).cell(op.result.p_t1).cell(op.result.p_t2);
        w.cell(op.result.q_t2);
        loss_cells(w, op.result.losses);
        w.cell(op.converged ? 1 : 0).cell(op.iterations);
        w.end_row();
        r.failed += op.converged ? 0 : 1;
    }
    r.csv = w.str();
    return r;
}

int cmd_sweep_eff(const std::string& params_path, const std::string& out_dir, const SweepSpec& spec,
                  const Overrides& o) {
    return guarded([&] {
        auto params = params_from(params_path);
        if (o.eps_sgn) params.eps_sgn = *o.eps_sgn;
        params.validate();
        const auto r = run_sweep(params, params.v_dc, spec, o.threads);
        ensure_dir(out_dir);
        write_file(join(out_dir, "efficiency.csv"), r.csv);
        if (r.failed > 0) {
            log::error(std::to_string(r.failed) + " sweep points did not converge");
            return static_cast<int>(kNonConvergence);
        }
        return static_cast<int>(kOk);
    });
}

// ---------------------------------------------------------------- validate-td

TdResult run_validate_td(const td::TdConfig& cfg, const inverter::TsbiParams& params, double p_target,
                         int window_cycles, bool dump_waveform) {
    TdResult r;
    r.validation = td::validate(cfg, params.ssc, params.lcl, p_target, window_cycles);
    const auto w = td::simulate(r.validation.config, params.ssc, params.lcl);
    r.audit = td::energy_audit(w);
    CsvWriter e({"quantity", "model", "td", "error_pct"});
    for (const auto& row : r.validation.errors) {
        e.cell(row.quantity).cell(row.model).cell(row.reference).cell(row.error_pct);
        e.end_row();
    }
    r.errors_csv = e.str();
    const auto& m = r.validation.metrics;
    CsvWriter mc({"theta_rad", "i_t_avg", "i_t_rms", "i_d_avg", "i_d_rms", "v_cond", "p_cond", "i_ac_rms",
                  "v_bridge_rms", "p_dc", "p_out_avg"});
    mc.cell(r.validation.config.theta).cell(m.i_t_avg).cell(m.i_t_rms).cell(m.i_d_avg).cell(m.i_d_rms);
    mc.cell(m.v_cond).cell(m.p_cond).cell(m.i_ac_rms).cell(m.v_bridge_rms).cell(m.p_dc).cell(m.p_out_avg);
    mc.end_row();
    r.metrics_csv = mc.str();
    if (dump_waveform) {
        CsvWriter d({"t", "i_l1", "i_l2", "v_c", "s_a", "s_b"});
        for (std::size_t k = 0; k < w.n_steps(); ++k) {
            d.cell(w.t0 + static_cast<double>(k) * w.config.dt).cell(w.i1[k]).cell(w.i2[k]).cell(w.v_c[k]);
            d.cell(w.s_a[k]).cell(w.s_b[k]);
            d.end_row();
        }
        r.waveform_csv = d.str();
    }
    return r;
}

int cmd_validate_td(const std::string& params_path, const std::string& out_dir, double p_target, double dt,
                    bool dump_waveform) {
    return guarded([&] {
        const auto params = params_from(params_path);
        td::TdConfig cfg;
        cfg.dt = dt;
        const auto r = run_validate_td(cfg, params, p_target, 18, dump_waveform);
        ensure_dir(out_dir);
        write_file(join(out_dir, "td_errors.csv"), r.errors_csv);
        write_file(join(out_dir, "td_metrics.csv"), r.metrics_csv);
        if (dump_waveform) write_file(join(out_dir, "td_waveform.csv"), r.waveform_csv);
        if (std::abs(r.audit.mismatch()) > 0.005 * std::abs(r.audit.source)) {
            log::error("time-domain energy audit mismatch " + format_double(r.audit.mismatch()) + " J");
            return static_cast<int>(kInvariantViolation);
        }
        return static_cast<int>(kOk);
    });
}

// ---------------------------------------------------------------- mpp

std::string run_mpp(const std::vector<MppRow>& rows) {
    CsvWriter w({"id", "v_mp", "i_mp", "p_mp", "converged", "iterations", "residual", "sweep_p_mp", "gap_pct"});
    for (const auto& row : rows) {
        const auto m = der::solve_mpp(row.pv);
        const auto sw = der::sweep_mpp(row.pv, 2000);
        w.cell(row.id).cell(m.point.v_mp).cell(m.point.i_mp).cell(m.point.p_mp).cell(m.converged ? 1 : 0);
        w.cell(m.iterations).cell(m.residual).cell(sw.p_mp);
        w.cell(sw.p_mp > 0.0 ? 100.0 * (sw.p_mp - m.point.p_mp) / sw.p_mp : 0.0);
        w.end_row();
        if (!m.converged) throw NumericalError("MPP solve for '" + row.id + "' did not converge");
    }
    return w.str();
}

int cmd_mpp(const std::string& scenario_path, const std::string& out_dir) {
    return guarded([&] {
        std::vector<MppRow> rows;
        if (scenario_path.empty()) {
            rows.push_back({"lg400", der::lg400_fixture()});
        } else {
            const auto s = parse_scenario(read_file(scenario_path));
            for (const auto& inv : s.inverters)
                if (const auto* pv = std::get_if<der::PvDer>(&inv.der)) rows.push_back({inv.id, pv->params});
            if (rows.empty()) throw InputError("scenario has no PV inverters");
        }
        const auto csv = run_mpp(rows);
        ensure_dir(out_dir);
        write_file(join(out_dir, "mpp.csv"), csv);
        return static_cast<int>(kOk);
    });
}

// ---------------------------------------------------------------- dispatch

DispatchRun run_dispatch(const dispatch::DispatchScenario& scn) {
    DispatchRun r;
    r.schedule = dispatch::solve_dispatch(scn);
    r.idle = dispatch::idle_schedule(scn);
    r.schedule_csv = dispatch::schedule_csv(scn, r.schedule);
    return r;
}

std::string dispatch_summary_csv(const std::vector<std::pair<dispatch::DispatchScenario, DispatchRun>>& runs) {
    CsvWriter w({"model", "objective", "idle_objective", "complementarity_residual", "min_soc", "max_soc",
                 "converged", "gradient_norm", "iterations"});
    for (const auto& [scn, r] : runs) {
        const auto& s = r.schedule;
        w.cell(std::holds_alternative<dispatch::CeCs>(scn.model) ? "ce_cs" : "tsbi");
        w.cell(s.objective).cell(r.idle.objective).cell(dispatch::complementarity_residual(s));
        w.cell(*std::min_element(s.soc.begin(), s.soc.end())).cell(*std::max_element(s.soc.begin(), s.soc.end()));
        w.cell(s.converged ? 1 : 0).cell(s.gradient_norm).cell(s.iterations);
        w.end_row();
    }
    return w.str();
}

int cmd_dispatch(const std::string& scenario_path, const std::string& out_dir, const std::string& model,
                 const Overrides& o) {
    return guarded([&] {
        const auto base = scenario_path.empty() ? dispatch::synthetic_day() : parse_dispatch(read_file(scenario_path));
        std::vector<dispatch::DispatchScenario> scns;
        auto cecs = [&] {
            auto s = base;
            if (!std::holds_alternative<dispatch::CeCs>(s.model)) {
                const auto eff = dispatch::effective_weighted_efficiency(
                    s.inverter, solve::linspace(0.1 * s.p_batt_max, s.p_batt_max, 10), s.battery.v_oc_nom);
                s.model = dispatch::CeCs{eff.eta_c, eff.eta_d, 1.0};
            }
            return s;
        };
        auto tsbi = [&] {
            auto s = base;
            s.model = dispatch::TsbiModel{};
            return s;
        };
        if (model == "scenario")
            scns.push_back(base);
        else if (model == "tsbi")
            scns.push_back(tsbi());
        else if (model == "ce_cs")
            scns.push_back(cecs());
        else if (model == "both")
            scns = {tsbi(), cecs()};
        else
            throw InputError("unknown dispatch model '" + model + "' (expected scenario, tsbi, ce_cs or both)");

        std::vector<std::pair<dispatch::DispatchScenario, DispatchRun>> runs(scns.size());
        solve::parallel_for(scns.size(), o.threads, [&](std::size_t i) { runs[i] = {scns[i], run_dispatch(scns[i])}; });

        ensure_dir(out_dir);
        int code = kOk;
        for (const auto& [scn, r] : runs) {
            const bool ce = std::holds_alternative<dispatch::CeCs>(scn.model);
            write_file(join(out_dir, ce ? "schedule_ce_cs.csv" : "schedule_tsbi.csv"), r.schedule_csv);
            if (!r.schedule.converged) {
                log::error("dispatch did not converge; projected gradient " + format_double(r.schedule.gradient_norm));
                code = std::max(code, static_cast<int>(kNonConvergence));
            }
            const auto& soc = r.schedule.soc;
            const bool soc_ok = *std::min_element(soc.begin(), soc.end()) >= scn.battery.soc_min - 1e-6 &&
                                *std::max_element(soc.begin(), soc.end()) <= scn.battery.soc_max + 1e-6;
            const double cs = dispatch::complementarity_residual(r.schedule);
            const bool cs_ok = !ce || cs <= std::get<dispatch::CeCs>(scn.model).eps_cs + 1e-9;
            if (!soc_ok || !cs_ok) {
                log::error("dispatch post-check failed (SOC bounds or complementarity)");
                code = kInvariantViolation;
            }
        }
        write_file(join(out_dir, "dispatch_summary.csv"), dispatch_summary_csv(runs));
        return code;
    });
}

// ---------------------------------------------------------------- check-jacobian

JacobianReport run_check_jacobian(const ScenarioFile& s, int samples, std::uint64_t seed) {
    const auto net = s.network();
    const solve::PowerFlowSystem sys(net, s.inverters);
    const auto x0 = sys.initial_state(solve::InitMode::Consistent);
    JacobianReport r;
    CsvWriter w({"sample", "residual_inf", "max_rel_error", "worst_row"});
    for (int k = 0; k < samples; ++k) {
        const auto x = k == 0 ? x0 : solve::random_state(sys, x0, seed + static_cast<std::uint64_t>(k));
        const auto c = solve::check_jacobian(sys, x);
        w.cell(k).cell(sys.residual_norm(x)).cell(c.max_rel_error).cell(c.worst_row);
        w.end_row();
        r.worst = std::max(r.worst, c.max_rel_error);
    }
    r.csv = w.str();
    return r;
}

int cmd_check_jacobian(const std::string& scenario_path, const std::string& out_dir, int samples,
                       const Overrides& o) {
    return guarded([&] {
        if (samples < 1) throw InputError("check-jacobian needs at least one sample");
        auto s = parse_scenario(read_file(scenario_path));
        apply_overrides(s, o);
        const auto r = run_check_jacobian(s, samples, 1);
        ensure_dir(out_dir);
        write_file(join(out_dir, "jacobian.csv"), r.csv);
        if (r.worst >= 1e-5) {
            log::error("Jacobian mismatch " + format_double(r.worst));
            return static_cast<int>(kInvariantViolation);
        }
        return static_cast<int>(kOk);
    });
}

}  // namespace tsbi::shell
