// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "tsbi/csv.hpp"
#include "tsbi/dispatch.hpp"
#include "tsbi/efficiency.hpp"
#include "tsbi/fixtures.hpp"
#include "tsbi/shell.hpp"

using namespace tsbi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ctrl::ConstantPF upf() { return {1.0, ctrl::PfSign::Lagging}; }

double v_mag_pu(const solve::InverterResult& r, double v_base) { return std::hypot(r.v_t2.re, r.v_t2.im) / v_base; }

// ---------------------------------------------------------------- 1

struct TdRun {
    shell::TdResult result;
    double seconds = 0.0;
};

TdRun run_td() {
    const auto t0 = std::chrono::steady_clock::now();
    TdRun r;
    r.result = shell::run_validate_td(td::TdConfig{}, inverter::default_params(), 1440.0, 18, false);
    r.seconds = seconds_since(t0);
    return r;
}

Outcome criterion1(const TdRun& r) {
    double worst = 0.0;
    std::string which;
    for (const auto& e : r.result.validation.errors) {
        if (e.error_pct > worst) {
            worst = e.error_pct;
            which = e.quantity;
        }
    }
    const double p_out = r.result.validation.metrics.p_out_avg;
    const bool ok = worst <= 5.0 && r.seconds <= 60.0 && std::abs(p_out - 1440.0) <= 1.0;
    return {ok, fmt("loss model vs time-domain at P_out=%.1f W: worst error %.3f%% (%s, limit 5%%), %.2f s "
                    "(limit 60 s)",
                    p_out, worst, which.c_str(), r.seconds)};
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> um(-1.0, 1.0), ui(1e-3, 100.0);
    double worst_rms = 0.0, worst_avg = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double m = um(rng), i = ui(rng);
        const auto c = inverter::ssc_device_currents(m, i);
        const double rms = c.i_t_rms * c.i_t_rms + c.i_d_rms * c.i_d_rms, rms_ref = i * i / 2.0;
        const double avg = c.i_t_avg + c.i_d_avg, avg_ref = std::numbers::sqrt2 * i / std::numbers::pi;
        worst_rms = std::max(worst_rms, std::abs(rms - rms_ref) / rms_ref);
        worst_avg = std::max(worst_avg, std::abs(avg - avg_ref) / avg_ref);
    }
    return {worst_rms <= 1e-12 && worst_avg <= 1e-12,
            fmt("device-current identities over 10^4 samples: rms rel err %.2e, avg rel err %.2e (limit 1e-12)",
                worst_rms, worst_avg)};
}

// ---------------------------------------------------------------- 3

struct AuditRun {
    std::string csv;
    int converged = 0, forward = 0, reverse = 0, attempts = 0;
    double worst_ratio = 0.0, min_component = 0.0, seconds = 0.0;
};

AuditRun run_audit() {
    const auto t0 = std::chrono::steady_clock::now();
    AuditRun a;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CsvWriter w({"sample", "s_rated", "v_dc", "p_w", "q_var", "p_t1_w", "p_t2_w", "loss_total_w", "mismatch_w",
                 "min_component_w"});
    while (a.converged < 1000 && a.attempts < 3000) {
        ++a.attempts;
        const double s = inverter::standard_ratings()[static_cast<std::size_t>(u(rng) * 4.0) % 4];
        auto params = inverter::default_params(s, 400.0);
        auto dc = solve::ideal_dc_source(200.0 + 400.0 * u(rng));
        dc.params.r_int = 0.2 * u(rng);
        const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
        const double p = sign * s * (0.02 + 0.93 * u(rng));
        const double q = s * 0.3 * (2.0 * u(rng) - 1.0);
        const auto op = solve::evaluate_operating_point(params, dc, p, q);
        if (!op.converged) continue;
        ++a.converged;
        (op.result.p_t1 > 0 ? a.forward : a.reverse) += 1;
        const auto& r = op.result;
        const double ratio = std::abs(r.audit_mismatch()) / std::max(1.0, std::abs(r.p_t1));
        a.worst_ratio = std::max(a.worst_ratio, ratio);
        a.min_component = std::min(a.min_component, r.losses.min_component());
        w.cell(a.converged).cell(s).cell(dc.params.v_oc_nom).cell(p).cell(q).cell(r.p_t1).cell(r.p_t2);
        w.cell(r.losses.total()).cell(r.audit_mismatch()).cell(r.losses.min_component());
        w.end_row();
    }
    a.csv = w.str();
    a.seconds = seconds_since(t0);
    return a;
}

Outcome criterion3(const AuditRun& a) {
    const bool ok = a.converged == 1000 && a.forward > 0 && a.reverse > 0 && a.worst_ratio <= 1e-6 &&
                    a.min_component >= -1e-9 && a.seconds <= 30.0;
    return {ok, fmt("energy audit on %d converged points (%d forward, %d reverse, %d attempts): worst "
                    "|mismatch|/max(1,|P_T1|) %.2e (limit 1e-6), min loss component %.2e W, %.2f s (limit 30 s)",
                    a.converged, a.forward, a.reverse, a.attempts, a.worst_ratio, a.min_component, a.seconds)};
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
    const auto params = inverter::default_params();
    const double s = params.s_rated;
    const auto P = solve::linspace(0.02 * s, s, 50);
    const auto Q = solve::linspace(-0.4 * s, 0.4 * s, 21);
    const auto pts = solve::sweep_efficiency(params, solve::ideal_dc_source(400.0), P, Q, {}, 4);
    const double margin = 1e-6;
    for (const auto& op : pts)
        if (!op.converged) return {false, fmt("sweep point (%.0f W, %.0f var) did not converge", op.p_set, op.q_set)};
    auto eta = [&](std::size_t ip, std::size_t iq) { return pts[ip * Q.size() + iq].efficiency(); };
    const std::size_t q0 = 10, p50 = 24;

    // (a) light load below half load.
    const bool a = eta(0, q0) < eta(p50, q0) - margin;

    // (b) single interior peak along P at Q = 0: rises, then rolls off.
    std::size_t k = 0;
    for (std::size_t i = 1; i < P.size(); ++i)
        if (eta(i, q0) > eta(k, q0)) k = i;
    bool b = k > 0 && k + 1 < P.size();
    for (std::size_t i = 0; b && i < k; ++i) b = eta(i + 1, q0) > eta(i, q0);
    for (std::size_t i = k; b && i + 1 < P.size(); ++i) b = eta(i + 1, q0) < eta(i, q0);
    b = b && eta(k, q0) > eta(0, q0) + margin && eta(k, q0) > eta(P.size() - 1, q0) + margin;

    // (c) at half load the best Q is a small capacitive (injecting) value and
    // efficiency falls off on both sides of it.
    std::size_t j = 0;
    for (std::size_t i = 1; i < Q.size(); ++i)
        if (eta(p50, i) > eta(p50, j)) j = i;
    bool c = Q[j] >= 0.0 && Q[j] <= 0.1 * s && eta(p50, j) >= eta(p50, q0);
    for (std::size_t i = j; c && i + 1 < Q.size(); ++i) c = eta(p50, i + 1) < eta(p50, i) - margin;
    for (std::size_t i = j; c && i > 0; --i) c = eta(p50, i - 1) < eta(p50, i) - margin;

    return {a && b && c,
            fmt("efficiency surface 50x21: (a) eta(2%%)=%.6f < eta(50%%)=%.6f %s; (b) peak %.6f at P=%.0f W "
                "%s; (c) best Q at half load %+.0f var, eta %.6f vs %.6f at Q=0 %s",
                eta(0, q0), eta(p50, q0), a ? "ok" : "FAIL", eta(k, q0), P[k], b ? "ok" : "FAIL", Q[j], eta(p50, j),
                eta(p50, q0), c ? "ok" : "FAIL")};
}

// ---------------------------------------------------------------- 5

Outcome criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<der::PvParams> cases{der::lg400_fixture()};
    for (int k = 0; k < 50; ++k) {
        der::PvParams p;
        p.i_ph = 2.0 + 12.0 * u(rng);
        p.i_0 = std::pow(10.0, -11.0 + 3.0 * u(rng));
        p.r_s = 0.5 * u(rng);
        p.r_sh = 50.0 + 950.0 * u(rng);
        p.n_d = 1.0 + 0.5 * u(rng);
        p.n_s = std::floor(36.0 + 60.0 * u(rng));
        p.v_t = 0.025693;
        cases.push_back(p);
    }
    double worst = 0.0;
    int failed = 0;
    for (const auto& p : cases) {
        const auto m = der::solve_mpp(p);
        const auto sw = der::sweep_mpp(p, 2000);
        if (!m.converged) ++failed;
        worst = std::max(worst, std::abs(m.point.p_mp - sw.p_mp) / sw.p_mp);
    }
    const auto lg = der::solve_mpp(der::lg400_fixture()).point;
    const double secs = seconds_since(t0);
    const bool anchored = std::abs(lg.v_mp - 40.6) <= 0.01 * 40.6 && std::abs(lg.i_mp - 9.86) <= 0.01 * 9.86;
    return {failed == 0 && worst <= 1e-3 && anchored && secs <= 5.0,
            fmt("MPP vs 2000-point sweep on 51 modules: worst power gap %.4f%% (limit 0.1%%), %d unconverged; "
                "LG400 V_MP=%.3f V I_MP=%.3f A; %.3f s (limit 5 s)",
                100.0 * worst, failed, lg.v_mp, lg.i_mp, secs)};
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
    std::vector<ctrl::VoltVar> curves{ctrl::VoltVar{}, ctrl::VoltVar::default_curve(7600.0)};
    curves.push_back({0.92, 0.97, 1.03, 1.08, 1000.0, -3000.0, 1e-6});
    curves.push_back({0.88, 0.99, 1.01, 1.12, 4000.0, -1000.0, 1e-4});
    double worst_ratio = 0.0;
    for (const auto& vv : curves) {
        const double bound = (vv.q_max / (vv.v2 - vv.v1) + std::abs(vv.q_min) / (vv.v4 - vv.v3)) * std::sqrt(vv.eps_vv);
        double gap = 0.0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) {
            const double v = 0.8 + 0.4 * k / (n - 1.0);
            gap = std::max(gap, std::abs(ctrl::voltvar_q(vv, v) - ctrl::voltvar_piecewise(vv, v)));
        }
        worst_ratio = std::max(worst_ratio, gap / bound);
    }
    auto s = shell::voltvar10();
    s.solver.tol_inf = 1e-8;
    s.solver.max_iter = 50;
    s.solver.init = solve::InitMode::Flat;
    const auto rep = solve::solve_power_flow(solve::PowerFlowSystem(s.network(), s.inverters), s.solver);
    const double res = rep.residual_history.empty() ? INFINITY : rep.residual_history.back();
    return {worst_ratio <= 1.0 && rep.converged && res < 1e-8 && rep.iterations <= 50,
            fmt("smooth Volt-VAR: sup gap / bound = %.4f on 4 curves x 10^5 points (limit 1); 10-node 5-inverter "
                "fixture converged=%d in %d iterations, residual %.2e",
                worst_ratio, rep.converged ? 1 : 0, rep.iterations, res)};
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
    const auto s = shell::feeder4(ctrl::VoltVar{});
    const auto r = shell::run_check_jacobian(s, 100, 700);
    const auto t = shell::run_check_jacobian(shell::voltvar10(), 100, 900);
    const double worst = std::max(r.worst, t.worst);
    return {worst < 1e-5, fmt("analytic vs central-difference Jacobian at 2x100 random states: worst row-relative "
                              "error %.2e (limit 1e-5)",
                              worst)};
}

// ---------------------------------------------------------------- 8

struct FeederRun {
    shell::PfResult upf, vv;
    double upf_seconds = 0.0, vv_seconds = 0.0;
    std::string csv() const {
        return upf.voltages_csv + upf.inverters_csv + upf.trace_csv + vv.voltages_csv + vv.inverters_csv + vv.trace_csv;
    }
};

FeederRun run_feeder() {
    FeederRun f;
    auto a = shell::synthetic_feeder(1000, 100, upf());
    auto b = shell::synthetic_feeder(1000, 100, ctrl::VoltVar{});
    a.solver.tol_inf = b.solver.tol_inf = 1e-8;
    auto t0 = std::chrono::steady_clock::now();
    f.upf = shell::run_pf(a);
    f.upf_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    f.vv = shell::run_pf(b);
    f.vv_seconds = seconds_since(t0);
    return f;
}

Outcome criterion8(const FeederRun& f) {
    const auto vvs = shell::synthetic_feeder(1000, 100, ctrl::VoltVar{});
    const double vb = vvs.base.v_base;
    int outside = 0, closer = 0, farther = 0;
    double da = 0.0, db = 0.0;
    for (std::size_t k = 0; k < vvs.inverters.size(); ++k) {
        const auto& vv = std::get<ctrl::VoltVar>(vvs.inverters[k].control.q_law);
        const double x = shell::dead_band_distance(v_mag_pu(f.upf.report.inverters[k], vb), vv);
        const double y = shell::dead_band_distance(v_mag_pu(f.vv.report.inverters[k], vb), vv);
        da += x;
        db += y;
        if (x > 0.0) {
            ++outside;
            closer += y < x ? 1 : 0;
        }
        farther += y > x + 1e-12 ? 1 : 0;
    }
    const auto& ra = f.upf.report;
    const auto& rb = f.vv.report;
    const bool ok = ra.converged && rb.converged && ra.iterations <= 25 && rb.iterations <= 25 &&
                    f.upf_seconds <= 10.0 && f.vv_seconds <= 10.0 && outside > 0 && closer == outside &&
                    farther == 0 && db < da && f.upf.violations.empty() && f.vv.violations.empty();
    return {ok, fmt("1000-node feeder, 100 inverters: UPF %d iters %.2f s, Volt-VAR %d iters %.2f s (limits 25, "
                    "10 s); %d/%d out-of-band buses moved closer, %d farther; dead-band distance %.4f -> %.4f p.u.",
                    ra.iterations, f.upf_seconds, rb.iterations, f.vv_seconds, closer, outside, farther, da, db)};
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
    std::string detail;
    bool ok = true;
    for (const auto& model : {dispatch::DispatchModel{dispatch::TsbiModel{}}, dispatch::DispatchModel{dispatch::CeCs{}}}) {
        const auto scn = dispatch::synthetic_day(model);
        const auto t0 = std::chrono::steady_clock::now();
        const auto s = dispatch::solve_dispatch(scn);
        const double secs = seconds_since(t0);
        const auto idle = dispatch::idle_schedule(scn);
        const double cs = dispatch::complementarity_residual(s);
        const bool is_ce = std::holds_alternative<dispatch::CeCs>(model);
        const bool cs_ok = is_ce ? cs <= std::get<dispatch::CeCs>(model).eps_cs : cs == 0.0;
        const double lo = *std::min_element(s.soc.begin(), s.soc.end());
        const double hi = *std::max_element(s.soc.begin(), s.soc.end());
        const bool soc_ok = lo >= scn.battery.soc_min - 1e-6 && hi <= scn.battery.soc_max + 1e-6;
        const bool better = s.objective < idle.objective;
        ok = ok && cs_ok && soc_ok && better && secs <= 10.0 && scn.horizon() == 24;
        detail += fmt("%s%s: objective %.4f vs idle %.4f, complementarity %.3g, SOC [%.4f, %.4f], %.3f s",
                      detail.empty() ? "" : "; ", is_ce ? "CE-CS" : "TSBI", s.objective, idle.objective, cs, lo, hi,
                      secs);
    }
    return {ok, "24-step dispatch: " + detail};
}

// ---------------------------------------------------------------- 10

Outcome criterion10(const TdRun& td1, const AuditRun& au1, const FeederRun& fe1) {
    const auto td2 = run_td();
    const auto au2 = run_audit();
    const auto fe2 = run_feeder();
    const bool c1 = td1.result.errors_csv == td2.result.errors_csv && td1.result.metrics_csv == td2.result.metrics_csv;
    const bool c3 = au1.csv == au2.csv;
    const bool c8 = fe1.csv() == fe2.csv();
    return {c1 && c3 && c8, fmt("repeated runs byte-identical: criterion 1 %s (%zu bytes), criterion 3 %s (%zu bytes), "
                                "criterion 8 %s (%zu bytes)",
                                c1 ? "yes" : "no", td1.result.errors_csv.size() + td1.result.metrics_csv.size(),
                                c3 ? "yes" : "no", au1.csv.size(), c8 ? "yes" : "no", fe1.csv().size())};
}

int report(int n, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  criterion %2d  %-28s %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

}  // namespace

int main() {
    int failed = 0;
    TdRun td1;
    AuditRun au1;
    FeederRun fe1;
    failed += report(1, "loss-model validation", [&] {
        td1 = run_td();
        return criterion1(td1);
    });
    failed += report(2, "device-current identities", criterion2);
    failed += report(3, "energy audit", [&] {
        au1 = run_audit();
        return criterion3(au1);
    });
    failed += report(4, "efficiency surface", criterion4);
    failed += report(5, "maximum power point", criterion5);
    failed += report(6, "smooth Volt-VAR", criterion6);
    failed += report(7, "Jacobian correctness", criterion7);
    failed += report(8, "1000-node feeder", [&] {
        fe1 = run_feeder();
        return criterion8(fe1);
    });
    failed += report(9, "battery dispatch", criterion9);
    failed += report(10, "determinism", [&] { return criterion10(td1, au1, fe1); });
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed;
}
