#include "tsbi/tdbench.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "tsbi/errors.hpp"

namespace tsbi::td {

namespace {

using C = std::complex<double>;
constexpr double kPi = inverter::kPi;
constexpr double kSqrt2 = inverter::kSqrt2;

C to_c(const Phasor& p) { return {p.re, p.im}; }
Phasor to_p(const C& c) { return {c.real(), c.imag()}; }

// Triangular carrier in [-1, 1], starting at -1 at t = 0.
double carrier(double t, double fc) {
    const double u = t * fc - std::floor(t * fc);
    return u < 0.5 ? 4.0 * u - 1.0 : 3.0 - 4.0 * u;
}

// Time during which carrier < r over [0, t], in carrier periods.
double on_measure(double t, double fc, double r) {
    const double a = std::clamp((r + 1.0) / 4.0, 0.0, 0.5);
    const double x = t * fc;
    const double whole = std::floor(x);
    const double u = x - whole;
    return whole * 2.0 * a + std::min(u, a) + std::max(0.0, u - (1.0 - a));
}

struct Drops {
    double v_t, r_t, v_d, r_d;
};

// Leg midpoint voltage for upper on-fraction s and current j leaving the midpoint.
double leg_voltage(double s, double j, double v_dc, const Drops& d) {
    if (j > 0.0) return s * (v_dc - (d.v_t + d.r_t * j)) + (1.0 - s) * (-(d.v_d + d.r_d * j));
    if (j < 0.0) return s * (v_dc + (d.v_d - d.r_d * j)) + (1.0 - s) * (d.v_t - d.r_t * j);
    return s * v_dc;
}

struct Filter {
    double l1, l2, c, r1, r2, rd, r_load;
};

// Linear phasor solve of the filter driven by e (bridge) and vg (grid).
struct PhasorSolution {
    C i1, i2, vm;
};

PhasorSolution solve_filter(const Filter& f, double omega, C e, C vg) {
    const C z1(f.r1, omega * f.l1);
    const C z2(f.r2 + f.r_load, omega * f.l2);
    const C zc(f.rd, -1.0 / (omega * f.c));
    const C vm = (e / z1 + vg / z2) / (1.0 / z1 + 1.0 / zc + 1.0 / z2);
    return {(e - vm) / z1, (vm - vg) / z2, vm};
}

Filter make_filter(const TdConfig& cfg, const inverter::LclParams& lcl) {
    Filter f{lcl.l1, lcl.l2, lcl.c, lcl.r1, lcl.r2, lcl.r_damp, 0.0};
    if (const auto* r = std::get_if<ResistiveLoad>(&cfg.load)) f.r_load = r->r;
    return f;
}

C grid_phasor(const TdConfig& cfg) {
    if (const auto* g = std::get_if<StiffGrid>(&cfg.load)) return to_c(g->v);
    return {0.0, 0.0};
}

// Integrals over one step of the positive part (and its square) of a linear
// ramp from a to b, divided by the step length.
double pos_mean(double a, double b) {
    if (a >= 0.0 && b >= 0.0) return 0.5 * (a + b);
    if (a <= 0.0 && b <= 0.0) return 0.0;
    const double p = std::max(a, b), n = std::min(a, b);
    return p * p / (2.0 * (p - n));
}

double pos_sq_mean(double a, double b) {
    if (a >= 0.0 && b >= 0.0) return (a * a + a * b + b * b) / 3.0;
    if (a <= 0.0 && b <= 0.0) return 0.0;
    const double p = std::max(a, b), n = std::min(a, b);
    return p * p * p / (3.0 * (p - n));
}

struct DeviceSums {
    std::array<double, 4> t_avg{}, t_ms{}, d_avg{}, d_ms{};
};

// Adds one step of the four transistors and four diodes.
void add_devices(DeviceSums& s, double i_a, double i_b, double sa, double sb) {
    // leg A carries i1, leg B carries -i1
    const double pa = pos_mean(i_a, i_b), na = pos_mean(-i_a, -i_b);
    const double pa2 = pos_sq_mean(i_a, i_b), na2 = pos_sq_mean(-i_a, -i_b);
    // leg A: upper T (j>0), upper D (j<0), lower T (j<0), lower D (j>0)
    s.t_avg[0] += sa * pa;
    s.t_ms[0] += sa * pa2;
    s.d_avg[0] += sa * na;
    s.d_ms[0] += sa * na2;
    s.t_avg[1] += (1 - sa) * na;
    s.t_ms[1] += (1 - sa) * na2;
    s.d_avg[1] += (1 - sa) * pa;
    s.d_ms[1] += (1 - sa) * pa2;
    // leg B: j = -i1
    s.t_avg[2] += sb * na;
    s.t_ms[2] += sb * na2;
    s.d_avg[2] += sb * pa;
    s.d_ms[2] += sb * pa2;
    s.t_avg[3] += (1 - sb) * pa;
    s.t_ms[3] += (1 - sb) * pa2;
    s.d_avg[3] += (1 - sb) * na;
    s.d_ms[3] += (1 - sb) * na2;
}

double grid_voltage(const C& vg, double omega, double t) {
    return kSqrt2 * (vg.real() * std::sin(omega * t) + vg.imag() * std::cos(omega * t));
}

}  // namespace

void TdConfig::validate() const {
    if (!(dt > 0.0 && dt <= 2e-6)) throw InputError("td: dt must be in (0, 2 us]");
    if (!(carrier_freq > 0.0 && ref_freq > 0.0)) throw InputError("td: frequencies must be positive");
    if (!(v_dc > 0.0)) throw InputError("td: v_dc must be positive");
    if (!(m >= 0.0 && m <= 1.0)) throw InputError("td: modulation index must be in [0, 1]");
    if (!(record_from >= 0.0 && duration > record_from)) throw InputError("td: need 0 <= record_from < duration");
    if (const auto* r = std::get_if<ResistiveLoad>(&load))
        if (!(r->r > 0.0)) throw InputError("td: load resistance must be positive");
}

Waveforms simulate(const TdConfig& cfg, const inverter::SscParams& ssc, const inverter::LclParams& lcl) {
    cfg.validate();
    const Filter f = make_filter(cfg, lcl);
    const Drops drops{ssc.v_t, ssc.r_t, ssc.v_d, ssc.r_d};
    const double omega = 2.0 * kPi * cfg.ref_freq;
    const C vg = grid_phasor(cfg);
    const bool grid = std::holds_alternative<StiffGrid>(cfg.load);

    // Sinusoidal steady state of the lossless filter at t = 0.
    const C e = std::polar(cfg.m * cfg.v_dc / kSqrt2, cfg.theta);
    const auto ss = solve_filter(f, omega, e, vg);
    const C vc0 = ss.vm - f.rd * (ss.i1 - ss.i2);
    std::array<double, 3> x{kSqrt2 * ss.i1.imag(), kSqrt2 * vc0.imag(), kSqrt2 * ss.i2.imag()};

    auto deriv = [&](const std::array<double, 3>& y, double t, double sa, double sb) {
        const double vb = leg_voltage(sa, y[0], cfg.v_dc, drops) - leg_voltage(sb, -y[0], cfg.v_dc, drops);
        const double vm = y[1] + f.rd * (y[0] - y[2]);
        const double vo = grid ? grid_voltage(vg, omega, t) : 0.0;
        return std::array<double, 3>{(vb - f.r1 * y[0] - vm) / f.l1, (y[0] - y[2]) / f.c,
                                     (vm - (f.r2 + f.r_load) * y[2] - vo) / f.l2};
    };

    const auto n_total = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
    const auto k0 = static_cast<std::size_t>(std::llround(cfg.record_from / cfg.dt));
    Waveforms w;
    w.config = cfg;
    w.ssc = ssc;
    w.lcl = lcl;
    w.t0 = static_cast<double>(k0) * cfg.dt;
    const std::size_t n_rec = n_total - k0;
    w.i1.reserve(n_rec + 1);
    w.i2.reserve(n_rec + 1);
    w.v_c.reserve(n_rec + 1);
    w.s_a.reserve(n_rec);
    w.s_b.reserve(n_rec);

    const double h = cfg.dt;
    for (std::size_t k = 0; k < n_total; ++k) {
        const double t = static_cast<double>(k) * h;
        const double tm = t + 0.5 * h;
        const double r = cfg.m * std::sin(omega * tm + cfg.theta);
        double sa, sb;
        if (cfg.sampling == Sampling::Midpoint) {
            const double c = carrier(tm, cfg.carrier_freq);
            sa = c < r ? 1.0 : 0.0;
            sb = c < -r ? 1.0 : 0.0;
        } else {
            const double span = h * cfg.carrier_freq;
            sa = (on_measure(t + h, cfg.carrier_freq, r) - on_measure(t, cfg.carrier_freq, r)) / span;
            sb = (on_measure(t + h, cfg.carrier_freq, -r) - on_measure(t, cfg.carrier_freq, -r)) / span;
            sa = std::clamp(sa, 0.0, 1.0);
            sb = std::clamp(sb, 0.0, 1.0);
        }
        if (k == k0) {
            w.i1.push_back(x[0]);
            w.v_c.push_back(x[1]);
            w.i2.push_back(x[2]);
        }

        const auto k1 = deriv(x, t, sa, sb);
        std::array<double, 3> y;
        for (int i = 0; i < 3; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        const auto k2 = deriv(y, tm, sa, sb);
        for (int i = 0; i < 3; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        const auto k3 = deriv(y, tm, sa, sb);
        for (int i = 0; i < 3; ++i) y[i] = x[i] + h * k3[i];
        const auto k4 = deriv(y, t + h, sa, sb);
        for (int i = 0; i < 3; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2]) || std::abs(x[0]) > 1e6 ||
            std::abs(x[2]) > 1e6 || std::abs(x[1]) > 1e8)
            throw NumericalError("time-domain integration unstable at step " + std::to_string(k) +
                                 " (t = " + std::to_string(t) + " s); reduce dt");
        if (k >= k0) {
            w.s_a.push_back(sa);
            w.s_b.push_back(sb);
            w.i1.push_back(x[0]);
            w.v_c.push_back(x[1]);
            w.i2.push_back(x[2]);
        }
    }
    return w;
}

TdMetrics extract_metrics(const Waveforms& w, int window_cycles) {
    const auto& cfg = w.config;
    if (window_cycles < 5) throw InputError("metrics window must span at least 5 cycles");
    const auto n = static_cast<std::size_t>(std::llround(window_cycles / (cfg.ref_freq * cfg.dt)));
    if (n > w.n_steps() || w.i1.size() != w.n_steps() + 1)
        throw InputError("metrics window of " + std::to_string(window_cycles) + " cycles exceeds the record");
    const std::size_t start = w.n_steps() - n;
    const double omega = 2.0 * kPi * cfg.ref_freq;
    const Drops drops{w.ssc.v_t, w.ssc.r_t, w.ssc.v_d, w.ssc.r_d};
    const Filter f = make_filter(cfg, w.lcl);
    const C vg = grid_phasor(cfg);
    const bool grid = std::holds_alternative<StiffGrid>(cfg.load);

    DeviceSums dev;
    double fa = 0, fb = 0, va = 0, vb_ = 0, p_dc = 0, p_out = 0;
    for (std::size_t k = start; k < w.n_steps(); ++k) {
        const double a = w.i1[k], b = w.i1[k + 1];
        add_devices(dev, a, b, w.s_a[k], w.s_b[k]);
        const double t = w.t0 + static_cast<double>(k) * cfg.dt;
        const double t1 = t + cfg.dt, tm = t + 0.5 * cfg.dt;
        fa += 0.5 * (a * std::sin(omega * t) + b * std::sin(omega * t1));
        fb += 0.5 * (a * std::cos(omega * t) + b * std::cos(omega * t1));
        const double im = 0.5 * (a + b);
        const double vbr = leg_voltage(w.s_a[k], im, cfg.v_dc, drops) - leg_voltage(w.s_b[k], -im, cfg.v_dc, drops);
        va += vbr * std::sin(omega * tm);
        vb_ += vbr * std::cos(omega * tm);
        p_dc += cfg.v_dc * (w.s_a[k] - w.s_b[k]) * im;
        if (grid)
            p_out += 0.5 * (grid_voltage(vg, omega, t) * w.i2[k] + grid_voltage(vg, omega, t1) * w.i2[k + 1]);
        else
            p_out += 0.5 * f.r_load * (w.i2[k] * w.i2[k] + w.i2[k + 1] * w.i2[k + 1]);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    TdMetrics m;
    double t_ms = 0, d_ms = 0;
    for (int d = 0; d < 4; ++d) {
        m.t_avg_each[d] = dev.t_avg[d] * inv_n;
        m.t_rms_each[d] = std::sqrt(dev.t_ms[d] * inv_n);
        m.d_avg_each[d] = dev.d_avg[d] * inv_n;
        m.d_rms_each[d] = std::sqrt(dev.d_ms[d] * inv_n);
        m.i_t_avg += 0.25 * dev.t_avg[d] * inv_n;
        m.i_d_avg += 0.25 * dev.d_avg[d] * inv_n;
        t_ms += 0.25 * dev.t_ms[d] * inv_n;
        d_ms += 0.25 * dev.d_ms[d] * inv_n;
    }
    m.i_t_rms = std::sqrt(t_ms);
    m.i_d_rms = std::sqrt(d_ms);
    m.p_cond = 4.0 * (drops.v_t * m.i_t_avg + drops.r_t * t_ms) + 4.0 * (drops.v_d * m.i_d_avg + drops.r_d * d_ms);
    m.i_ac_rms = 2.0 * inv_n * std::hypot(fa, fb) / kSqrt2;
    m.v_bridge_rms = 2.0 * inv_n * std::hypot(va, vb_) / kSqrt2;
    m.v_cond = m.i_ac_rms > 0.0 ? m.p_cond / m.i_ac_rms : 0.0;
    m.p_dc = p_dc * inv_n;
    m.p_out_avg = p_out * inv_n;
    return m;
}

EnergyAudit energy_audit(const Waveforms& w) {
    const auto& cfg = w.config;
    const double h = cfg.dt;
    const double omega = 2.0 * kPi * cfg.ref_freq;
    const Drops drops{w.ssc.v_t, w.ssc.r_t, w.ssc.v_d, w.ssc.r_d};
    const Filter f = make_filter(cfg, w.lcl);
    const C vg = grid_phasor(cfg);
    const bool grid = std::holds_alternative<StiffGrid>(cfg.load);
    EnergyAudit e;
    for (std::size_t k = 0; k < w.n_steps(); ++k) {
        const double a = w.i1[k], b = w.i1[k + 1];
        const double t = w.t0 + static_cast<double>(k) * h;
        e.source += h * cfg.v_dc * (w.s_a[k] - w.s_b[k]) * 0.5 * (a + b);
        DeviceSums d;
        add_devices(d, a, b, w.s_a[k], w.s_b[k]);
        for (int i = 0; i < 4; ++i)
            e.devices += h * (drops.v_t * d.t_avg[i] + drops.r_t * d.t_ms[i] + drops.v_d * d.d_avg[i] +
                              drops.r_d * d.d_ms[i]);
        auto filt = [&](std::size_t j) {
            const double ic = w.i1[j] - w.i2[j];
            return f.r1 * w.i1[j] * w.i1[j] + f.r2 * w.i2[j] * w.i2[j] + f.rd * ic * ic;
        };
        e.filter += 0.5 * h * (filt(k) + filt(k + 1));
        if (grid)
            e.load += 0.5 * h *
                      (grid_voltage(vg, omega, t) * w.i2[k] + grid_voltage(vg, omega, t + h) * w.i2[k + 1]);
        else
            e.load += 0.5 * h * f.r_load * (w.i2[k] * w.i2[k] + w.i2[k + 1] * w.i2[k + 1]);
    }
    auto stored = [&](std::size_t j) {
        return 0.5 * (f.l1 * w.i1[j] * w.i1[j] + f.c * w.v_c[j] * w.v_c[j] + f.l2 * w.i2[j] * w.i2[j]);
    };
    e.stored_change = stored(w.n_steps()) - stored(0);
    return e;
}

SteadyStatePrediction predict_steady_state(const TdConfig& cfg, const inverter::SscParams& ssc,
                                           const inverter::LclParams& lcl) {
    const Filter f = make_filter(cfg, lcl);
    const double omega = 2.0 * kPi * cfg.ref_freq;
    const C vg = grid_phasor(cfg);
    const C mod = std::polar(cfg.m, cfg.theta);
    const C e = mod * (cfg.v_dc / kSqrt2);

    // Fixed point on the conduction source, which is small against the filter impedance.
    C vcond(0.0, 0.0);
    PhasorSolution s{};
    double p_c = 0.0, mcos = 0.0;
    for (int it = 0; it < 200; ++it) {
        s = solve_filter(f, omega, e - vcond, vg);
        const double i = std::abs(s.i1);
        if (i == 0.0) break;
        mcos = std::clamp((mod * std::conj(s.i1)).real() / i, -1.0, 1.0);
        p_c = inverter::ssc_conduction_loss(ssc, mcos, i);
        const C next = p_c * s.i1 / (i * i);
        const bool done = std::abs(next - vcond) < 1e-14 * std::max(1.0, std::abs(next));
        vcond = next;
        if (done) break;
    }
    SteadyStatePrediction p;
    p.i_ac = to_p(s.i1);
    p.i_out = to_p(s.i2);
    p.m_cosphi = mcos;
    const double i = std::abs(s.i1);
    const auto dc = inverter::ssc_device_currents(mcos, i);
    p.i_t_avg = dc.i_t_avg;
    p.i_t_rms = dc.i_t_rms;
    p.i_d_avg = dc.i_d_avg;
    p.i_d_rms = dc.i_d_rms;
    p.p_cond = p_c;
    p.v_cond = i > 0.0 ? p_c / i : 0.0;
    p.p_dc = (e * std::conj(s.i1)).real();
    p.p_out = std::holds_alternative<StiffGrid>(cfg.load) ? (vg * std::conj(s.i2)).real()
                                                          : f.r_load * std::norm(s.i2);
    return p;
}

std::array<ErrorRow, 5> compare_with_steady_state(const std::array<double, 5>& td, const std::array<double, 5>& model) {
    static const std::array<const char*, 5> names{"i_t_avg", "i_t_rms", "i_d_avg", "i_d_rms", "v_cond"};
    std::array<ErrorRow, 5> rows;
    for (int k = 0; k < 5; ++k) {
        if (td[k] == 0.0) throw InputError(std::string("reference value of ") + names[k] + " is zero");
        rows[k] = {names[k], model[k], td[k], std::abs(model[k] - td[k]) / std::abs(td[k]) * 100.0};
    }
    return rows;
}

std::array<ErrorRow, 5> compare_with_steady_state(const TdMetrics& td, const SteadyStatePrediction& model) {
    return compare_with_steady_state(
        std::array<double, 5>{td.i_t_avg, td.i_t_rms, td.i_d_avg, td.i_d_rms, td.v_cond},
        std::array<double, 5>{model.i_t_avg, model.i_t_rms, model.i_d_avg, model.i_d_rms, model.v_cond});
}

double find_theta_for_power(TdConfig cfg, const inverter::SscParams& ssc, const inverter::LclParams& lcl,
                            double p_target, double tol_w) {
    const int cycles = static_cast<int>(std::floor((cfg.duration - cfg.record_from) * cfg.ref_freq + 1e-9));
    auto td_power = [&](double th) {
        cfg.theta = th;
        return extract_metrics(simulate(cfg, ssc, lcl), cycles).p_out_avg;
    };
    auto model_power = [&](double th) {
        cfg.theta = th;
        return predict_steady_state(cfg, ssc, lcl).p_out;
    };

    // Starting guess from the phasor model, bisecting on [-pi/2, pi/2].
    double lo = -kPi / 2, hi = kPi / 2;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (model_power(mid) < p_target ? lo : hi) = mid;
    }
    const double guess = 0.5 * (lo + hi);

    double width = 0.01;
    lo = guess - width;
    hi = guess + width;
    double p_lo = td_power(lo), p_hi = td_power(hi);
    for (int k = 0; k < 20 && !(p_lo <= p_target && p_hi >= p_target); ++k) {
        width *= 2.0;
        if (p_lo > p_target) p_lo = td_power(lo -= width);
        if (p_hi < p_target) p_hi = td_power(hi += width);
    }
    if (!(p_lo <= p_target && p_hi >= p_target))
        throw NumericalError("could not bracket the target power " + std::to_string(p_target) + " W");
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double p = td_power(mid);
        if (std::abs(p - p_target) <= tol_w) return mid;
        (p < p_target ? lo : hi) = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

TdValidation validate(const TdConfig& base, const inverter::SscParams& ssc, const inverter::LclParams& lcl,
                      double p_target, int window_cycles) {
    TdValidation v;
    v.config = base;
    v.config.theta = find_theta_for_power(base, ssc, lcl, p_target);
    v.metrics = extract_metrics(simulate(v.config, ssc, lcl), window_cycles);
    v.prediction = predict_steady_state(v.config, ssc, lcl);
    v.errors = compare_with_steady_state(v.metrics, v.prediction);
    return v;
}

}  // namespace tsbi::td
