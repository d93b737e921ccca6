#include "tsbi/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "tsbi/csv.hpp"
#include "tsbi/efficiency.hpp"
#include "tsbi/errors.hpp"
#include "tsbi/log.hpp"

namespace tsbi::dispatch {

void DispatchScenario::validate() const {
    if (price.empty()) throw InputError("dispatch: horizon must be at least one step");
    if (load_w.size() != price.size() || pv_w.size() != price.size())
        throw InputError("dispatch: price, load and pv series must have equal length");
    if (!(dt > 0.0)) throw InputError("dispatch: dt must be positive");
    for (std::size_t t = 0; t < price.size(); ++t)
        if (!std::isfinite(price[t]) || !std::isfinite(load_w[t]) || !(pv_w[t] >= 0.0))
            throw InputError("dispatch: bad series value at step " + std::to_string(t));
    battery.validate();
    if (!(soc0 >= battery.soc_min && soc0 <= battery.soc_max))
        throw InputError("dispatch: initial SOC outside the battery bounds");
    if (!(p_batt_max > 0.0)) throw InputError("dispatch: p_batt_max must be positive");
    inverter.validate();
    if (const auto* ce = std::get_if<CeCs>(&model)) {
        if (!(ce->eta_c > 0.0 && ce->eta_c <= 1.0 && ce->eta_d > 0.0 && ce->eta_d <= 1.0))
            throw InputError("dispatch: efficiencies must be in (0, 1]");
        if (!(ce->eps_cs > 0.0)) throw InputError("dispatch: eps_cs must be positive");
    }
}

LossCurve::LossCurve(const inverter::TsbiParams& params, double v_dc_source, int points) {
    if (points < 3 || points % 2 == 0) throw InputError("loss curve needs an odd number of points >= 3");
    const auto der = solve::ideal_dc_source(v_dc_source);
    p_ = solve::linspace(-params.s_rated, params.s_rated, points);
    l_.resize(p_.size());
    solve::parallel_for(p_.size(), 1, [&](std::size_t k) {
        const auto op = solve::evaluate_operating_point(params, der, p_[k], 0.0);
        if (!op.converged)
            throw NumericalError("loss curve: inverter solve failed at " + std::to_string(p_[k]) + " W");
        l_[k] = op.result.losses.total();
    });
    m_.resize(p_.size());
    const std::size_t n = p_.size();
    m_[0] = (l_[1] - l_[0]) / (p_[1] - p_[0]);
    m_[n - 1] = (l_[n - 1] - l_[n - 2]) / (p_[n - 1] - p_[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) m_[k] = (l_[k + 1] - l_[k - 1]) / (p_[k + 1] - p_[k - 1]);
}

namespace {

// Segment index and local coordinate for cubic Hermite evaluation.
std::pair<std::size_t, double> locate(const std::vector<double>& p, double x) {
    const double h = p[1] - p[0];
    const double s = std::clamp((x - p.front()) / h, 0.0, static_cast<double>(p.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(s), p.size() - 2);
    return {k, s - static_cast<double>(k)};
}

}  // namespace

double LossCurve::loss(double x) const {
    const auto [k, u] = locate(p_, x);
    const double h = p_[1] - p_[0];
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * l_[k] + (u3 - 2 * u2 + u) * h * m_[k] + (-2 * u3 + 3 * u2) * l_[k + 1] +
           (u3 - u2) * h * m_[k + 1];
}

double LossCurve::slope(double x) const {
    const auto [k, u] = locate(p_, x);
    const double h = p_[1] - p_[0];
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * l_[k] + (-6 * u2 + 6 * u) * l_[k + 1]) / h + (3 * u2 - 4 * u + 1) * m_[k] +
           (3 * u2 - 2 * u) * m_[k + 1];
}

WeightedEfficiency effective_weighted_efficiency(const inverter::TsbiParams& params,
                                                 const std::vector<double>& levels_w, double v_dc_source) {
    if (levels_w.empty()) throw InputError("weighted efficiency: empty power grid");
    const auto der = solve::ideal_dc_source(v_dc_source);
    double ac_out = 0, dc_in = 0, dc_store = 0, ac_in = 0;
    for (double p : levels_w) {
        if (!(p > 0.0 && p <= params.s_rated)) throw InputError("weighted efficiency: levels must be in (0, s_rated]");
        const auto dis = solve::evaluate_operating_point(params, der, p, 0.0);
        const auto chg = solve::evaluate_operating_point(params, der, -p, 0.0);
        if (!dis.converged || !chg.converged)
            throw NumericalError("weighted efficiency: inverter solve failed at " + std::to_string(p) + " W");
        ac_out += dis.result.p_t2;
        dc_in += dis.result.p_t1;
        dc_store += -chg.result.p_t1;
        ac_in += -chg.result.p_t2;
    }
    return {dc_store / ac_in, ac_out / dc_in};
}

namespace {

double smax(double x, double d) { return 0.5 * (x + std::sqrt(x * x + d * d)); }
double smax_d(double x, double d) { return 0.5 * (1.0 + x / std::sqrt(x * x + d * d)); }
double pos(double x) { return x > 0.0 ? x : 0.0; }

// Problem in kW and hours. CE-CS unknowns: charge (first h) then discharge;
// TSBI unknowns: the signed inverter power.
struct Problem {
    const DispatchScenario& scn;
    const DispatchOptions& opts;
    const LossCurve* curve = nullptr;
    std::size_t h = 0;
    double dt_h = 0, cap = 0, pmax = 0, eps = 0;
    std::vector<double> lo, hi, price, load, pv;
    bool cecs = false;
    CeCs ce;

    Problem(const DispatchScenario& s, const DispatchOptions& o, const LossCurve* c) : scn(s), opts(o), curve(c) {}

    double loss(double x) const { return curve->loss(1e3 * x) * 1e-3; }
    double loss_slope(double x) const { return curve->slope(1e3 * x); }

    // battery-side discharge power per step and AC power
    void flows(const std::vector<double>& x, std::vector<double>& b, std::vector<double>& p_inv) const {
        b.resize(h);
        p_inv.resize(h);
        for (std::size_t t = 0; t < h; ++t) {
            if (cecs) {
                b[t] = x[h + t] - x[t];
                p_inv[t] = pv[t] + ce.eta_d * x[h + t] - x[t] / ce.eta_c;
            } else {
                p_inv[t] = x[t];
                b[t] = x[t] + loss(x[t]) - pv[t];
            }
        }
    }

    std::vector<double> soc(const std::vector<double>& b) const {
        std::vector<double> s(h + 1);
        s[0] = scn.soc0;
        for (std::size_t t = 0; t < h; ++t) s[t + 1] = s[t] - b[t] * dt_h / cap;
        return s;
    }

    double value(const std::vector<double>& x, double rho, std::vector<double>* grad) const {
        std::vector<double> b, p_inv;
        flows(x, b, p_inv);
        const auto s = soc(b);
        const double smin = scn.battery.soc_min, smx = scn.battery.soc_max;
        double f = 0.0;
        std::vector<double> ds(h + 1, 0.0);
        for (std::size_t t = 1; t <= h; ++t) {
            const double over = pos(s[t] - smx), under = pos(smin - s[t]);
            f += rho * (over * over + under * under);
            ds[t] = rho * (2 * over - 2 * under);
        }
        const double deficit = pos(scn.soc0 - s[h]);
        f += rho * deficit * deficit;
        ds[h] -= rho * 2 * deficit;
        std::vector<double> dg(h);
        for (std::size_t t = 0; t < h; ++t) {
            const double g = load[t] - p_inv[t];
            f += price[t] * smax(g, opts.smooth_kw) * dt_h;
            dg[t] = price[t] * smax_d(g, opts.smooth_kw) * dt_h;
        }
        if (cecs)
            for (std::size_t t = 0; t < h; ++t) {
                const double v = pos(x[t] * x[h + t] - eps);
                f += rho * v * v;
            }
        if (!grad) return f;

        // d f / d b_t through every later SOC
        std::vector<double> db(h);
        double tail = 0.0;
        for (std::size_t t = h; t-- > 0;) {
            tail += ds[t + 1];
            db[t] = -dt_h / cap * tail;
        }
        grad->assign(x.size(), 0.0);
        auto& gr = *grad;
        for (std::size_t t = 0; t < h; ++t) {
            if (cecs) {
                const double v = pos(x[t] * x[h + t] - eps);
                gr[t] = dg[t] / ce.eta_c - db[t] + 2 * rho * v * x[h + t];
                gr[h + t] = -dg[t] * ce.eta_d + db[t] + 2 * rho * v * x[t];
            } else {
                gr[t] = -dg[t] + db[t] * (1.0 + loss_slope(x[t]));
            }
        }
        return f;
    }

    void project(std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    }

    // TSBI power giving battery-side discharge b at step t
    double p_for_battery(std::size_t t, double b) const {
        double a = -curve->p_max() * 1e-3, c = curve->p_max() * 1e-3;
        auto f = [&](double x) { return x + loss(x) - pv[t] - b; };
        if (f(a) >= 0.0) return a;
        if (f(c) <= 0.0) return c;
        for (int k = 0; k < 200 && c - a > 1e-13; ++k) {
            const double m = 0.5 * (a + c);
            (f(m) < 0.0 ? a : c) = m;
        }
        return 0.5 * (a + c);
    }
};

Schedule finish(const Problem& pr, const std::vector<double>& x) {
    Schedule s;
    s.model = pr.scn.model;
    std::vector<double> b, p_inv;
    pr.flows(x, b, p_inv);
    const auto soc = pr.soc(b);
    s.soc = soc;
    for (std::size_t t = 0; t < pr.h; ++t) {
        s.p_inv_w.push_back(1e3 * p_inv[t]);
        s.battery_w.push_back(1e3 * b[t]);
        s.p_charge_w.push_back(pr.cecs ? 1e3 * x[t] : 0.0);
        s.p_discharge_w.push_back(pr.cecs ? 1e3 * x[pr.h + t] : 0.0);
        const double g = pr.load[t] - p_inv[t];
        s.grid_w.push_back(1e3 * g);
        s.cost.push_back(pr.price[t] * smax(g, pr.opts.smooth_kw) * pr.dt_h);
        s.objective += s.cost.back();
    }
    return s;
}

Problem make_problem(const DispatchScenario& scn, const DispatchOptions& opts, const LossCurve* curve) {
    Problem pr(scn, opts, curve);
    pr.h = scn.horizon();
    pr.dt_h = scn.dt / 3600.0;
    pr.cap = scn.capacity_kwh();
    pr.pmax = scn.p_batt_max * 1e-3;
    for (std::size_t t = 0; t < pr.h; ++t) {
        pr.price.push_back(scn.price[t]);
        pr.load.push_back(scn.load_w[t] * 1e-3);
        pr.pv.push_back(scn.pv_w[t] * 1e-3);
    }
    if (const auto* ce = std::get_if<CeCs>(&scn.model)) {
        pr.cecs = true;
        pr.ce = *ce;
        pr.eps = ce->eps_cs * 1e-6;
        pr.lo.assign(2 * pr.h, 0.0);
        pr.hi.assign(2 * pr.h, pr.pmax);
    } else {
        pr.lo.resize(pr.h);
        pr.hi.resize(pr.h);
        for (std::size_t t = 0; t < pr.h; ++t) {
            pr.lo[t] = pr.p_for_battery(t, -pr.pmax);
            pr.hi[t] = pr.p_for_battery(t, pr.pmax);
        }
    }
    return pr;
}

std::vector<double> idle_point(const Problem& pr) {
    if (pr.cecs) return std::vector<double>(2 * pr.h, 0.0);
    std::vector<double> x(pr.h);
    for (std::size_t t = 0; t < pr.h; ++t) x[t] = pr.p_for_battery(t, 0.0);
    return x;
}

}  // namespace

Schedule idle_schedule(const DispatchScenario& scn, const DispatchOptions& opts) {
    scn.validate();
    std::unique_ptr<LossCurve> curve;
    if (std::holds_alternative<TsbiModel>(scn.model))
        curve = std::make_unique<LossCurve>(scn.inverter, scn.battery.v_oc_nom);
    const auto pr = make_problem(scn, opts, curve.get());
    auto s = finish(pr, idle_point(pr));
    s.converged = true;
    return s;
}

Schedule solve_dispatch(const DispatchScenario& scn, const DispatchOptions& opts) {
    scn.validate();
    std::unique_ptr<LossCurve> curve;
    if (std::holds_alternative<TsbiModel>(scn.model))
        curve = std::make_unique<LossCurve>(scn.inverter, scn.battery.v_oc_nom);
    const auto pr = make_problem(scn, opts, curve.get());

    std::vector<double> x = idle_point(pr), g, trial, step(x.size());
    double rho = opts.rho0;
    double pg = 0.0;
    int total = 0;
    // Active-set projected Newton (bound-constrained), one pass per penalty
    // weight. The Hessian is a central difference of the analytic gradient;
    // a projected-gradient step is the fallback when Newton fails to descend.
    const std::size_t n = x.size();
    std::vector<double> gp, gm, xt;
    for (int round = 0; round < opts.rounds; ++round, rho *= opts.rho_growth) {
        double f = pr.value(x, rho, &g);
        for (int it = 0; it < opts.max_iter; ++it, ++total) {
            trial = x;
            for (std::size_t i = 0; i < n; ++i) trial[i] -= g[i];
            pr.project(trial);
            pg = 0.0;
            for (std::size_t i = 0; i < n; ++i) pg = std::max(pg, std::abs(trial[i] - x[i]));
            if (pg <= opts.tol) break;

            const double eps_a = std::min(1e-6, pg);
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i) {
                const bool at_lo = x[i] <= pr.lo[i] + eps_a && g[i] > 0.0;
                const bool at_hi = x[i] >= pr.hi[i] - eps_a && g[i] < 0.0;
                if (!at_lo && !at_hi) free.push_back(i);
            }
            std::fill(step.begin(), step.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) step[i] = -g[i];
            if (!free.empty()) {
                const auto nf = static_cast<Eigen::Index>(free.size());
                Eigen::MatrixXd hess(nf, nf);
                const double hd = 1e-6;
                for (Eigen::Index j = 0; j < nf; ++j) {
                    xt = x;
                    xt[free[j]] += hd;
                    pr.value(xt, rho, &gp);
                    xt[free[j]] -= 2 * hd;
                    pr.value(xt, rho, &gm);
                    for (Eigen::Index i = 0; i < nf; ++i) hess(i, j) = (gp[free[i]] - gm[free[i]]) / (2 * hd);
                }
                hess = 0.5 * (hess + hess.transpose()).eval();
                Eigen::VectorXd rhs(nf);
                for (Eigen::Index i = 0; i < nf; ++i) rhs(i) = -g[free[i]];
                double mu = 0.0;
                const double scale = std::max(1e-12, hess.diagonal().cwiseAbs().maxCoeff());
                for (int k = 0; k < 40; ++k) {
                    Eigen::LLT<Eigen::MatrixXd> llt(hess + mu * Eigen::MatrixXd::Identity(nf, nf));
                    if (llt.info() == Eigen::Success) {
                        const Eigen::VectorXd d = llt.solve(rhs);
                        for (Eigen::Index i = 0; i < nf; ++i) step[free[i]] = d(i);
                        break;
                    }
                    mu = mu == 0.0 ? 1e-10 * scale : mu * 10.0;
                }
            }
            bool accepted = false;
            for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
                if (attempt == 1)
                    for (std::size_t i = 0; i < n; ++i) step[i] = -g[i];
                double a = 1.0;
                for (int k = 0; k < 60; ++k, a *= 0.5) {
                    for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + a * step[i];
                    pr.project(trial);
                    double dec = 0.0;
                    for (std::size_t i = 0; i < n; ++i) dec += g[i] * (trial[i] - x[i]);
                    if (dec >= 0.0) continue;
                    const double ft = pr.value(trial, rho, nullptr);
                    if (ft <= f + 1e-4 * dec) {
                        x = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            if (!accepted) break;
            f = pr.value(x, rho, &g);
        }
    }

    // Land exactly on the relaxed complementarity set with the same net flow,
    // which leaves the SOC trajectory unchanged.
    if (pr.cecs)
        for (std::size_t t = 0; t < pr.h; ++t)
            if (x[t] * x[pr.h + t] > pr.eps) {
                const double net = x[pr.h + t] - x[t];
                const double c = 0.5 * (-net + std::sqrt(net * net + 4 * pr.eps));
                x[t] = c;
                x[pr.h + t] = c + net;
                while (x[t] * x[pr.h + t] > pr.eps) x[t] = std::nextafter(x[t], 0.0);
            }

    // Stop the battery at a bound where the penalty left a residual violation.
    std::vector<double> b, p_inv;
    pr.flows(x, b, p_inv);
    double e = pr.scn.soc0;
    const double smin = pr.scn.battery.soc_min, smx = pr.scn.battery.soc_max;
    for (std::size_t t = 0; t < pr.h; ++t) {
        double next = e - b[t] * pr.dt_h / pr.cap;
        if (next > smx || next < smin) {
            const double target = std::clamp(next, smin, smx);
            const double bt = (e - target) * pr.cap / pr.dt_h;
            if (pr.cecs) {
                if (bt >= 0.0) {
                    x[pr.h + t] = bt;
                    x[t] = 0.0;
                } else {
                    x[t] = -bt;
                    x[pr.h + t] = 0.0;
                }
            } else {
                x[t] = pr.p_for_battery(t, bt);
            }
            pr.flows(x, b, p_inv);
            next = std::clamp(e - b[t] * pr.dt_h / pr.cap, smin, smx);
        }
        e = next;
    }

    auto s = finish(pr, x);
    s.converged = pg <= opts.tol;
    s.gradient_norm = pg;
    s.iterations = total;
    if (!s.converged) log::warn("dispatch did not converge: projected gradient " + std::to_string(pg));
    return s;
}

double complementarity_residual(const Schedule& s) {
    if (std::holds_alternative<TsbiModel>(s.model)) return 0.0;
    double r = 0.0;
    for (std::size_t t = 0; t < s.p_charge_w.size(); ++t) r = std::max(r, s.p_charge_w[t] * s.p_discharge_w[t]);
    return r;
}

DispatchScenario synthetic_day(DispatchModel model) {
    DispatchScenario scn;
    scn.model = model;
    scn.battery.v_oc_nom = 400.0;
    scn.battery.c_batt = 13.5e3 * 3600.0 / 400.0;
    scn.battery.r_int = 0.0;
    scn.battery.i_max = 50.0;
    for (int t = 0; t < 24; ++t) {
        const double hr = t + 0.5;
        scn.price.push_back(t >= 16 && t < 21 ? 0.30 : 0.10);
        scn.pv_w.push_back(hr > 6.0 && hr < 19.0 ? 4500.0 * std::exp(-std::pow((hr - 12.5) / 2.8, 2)) : 0.0);
        scn.load_w.push_back(600.0 + 2400.0 * std::exp(-std::pow((hr - 19.0) / 2.0, 2)) +
                             400.0 * std::exp(-std::pow((hr - 8.0) / 1.5, 2)));
    }
    return scn;
}

std::string schedule_csv(const DispatchScenario& scn, const Schedule& s) {
    CsvWriter w({"step", "price", "load_w", "pv_w", "p_inv_w", "soc", "grid_w", "cost"});
    for (std::size_t t = 0; t < s.p_inv_w.size(); ++t) {
        w.cell(t).cell(scn.price[t]).cell(scn.load_w[t]).cell(scn.pv_w[t]).cell(s.p_inv_w[t]).cell(s.soc[t + 1]);
        w.cell(s.grid_w[t]).cell(s.cost[t]);
        w.end_row();
    }
    return w.str();
}

}  // namespace tsbi::dispatch
