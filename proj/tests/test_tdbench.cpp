#include "doctest.h"

#include <cmath>
#include <string>

#include "tsbi/errors.hpp"
#include "tsbi/inverter.hpp"
#include "tsbi/tdbench.hpp"

using namespace tsbi;
using namespace tsbi::td;

namespace {

const inverter::TsbiParams kParams = inverter::default_params();

// Hand-built record of `cycles` fundamental cycles at 1 us.
Waveforms synthetic(int cycles, auto current, auto gate_a, auto gate_b) {
    Waveforms w;
    w.config.dt = 1e-6;
    w.config.record_from = 0.0;
    w.ssc = kParams.ssc;
    w.lcl = kParams.lcl;
    const auto n = static_cast<std::size_t>(std::llround(cycles / (w.config.ref_freq * w.config.dt)));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * w.config.dt;
        w.i1.push_back(current(t));
        w.i2.push_back(current(t));
        w.v_c.push_back(0.0);
        if (k < n) {
            w.s_a.push_back(gate_a(t + 0.5 * w.config.dt));
            w.s_b.push_back(gate_b(t + 0.5 * w.config.dt));
        }
    }
    return w;
}

}  // namespace

TEST_CASE("config validation") {
    TdConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt = 5e-6;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.record_from = c.duration;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.m = 1.2;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.load = ResistiveLoad{0.0};
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("zero modulation into a resistor stays at rest") {
    TdConfig c;
    c.m = 0.0;
    c.load = ResistiveLoad{10.0};
    c.duration = 0.3;
    c.record_from = 0.1;
    const auto w = simulate(c, kParams.ssc, kParams.lcl);
    double peak = 0.0;
    for (double i : w.i2) peak = std::max(peak, std::abs(i));
    CHECK(peak < 1e-6);
    const auto m = extract_metrics(w, 10);
    CHECK(m.i_t_avg < 1e-6);
    CHECK(m.i_d_rms < 1e-6);
    CHECK(m.p_out_avg < 1e-9);
}

TEST_CASE("resistive load bridge fundamental") {
    TdConfig c;
    c.m = 0.8;
    c.load = ResistiveLoad{10.0};
    c.duration = 0.3;
    c.record_from = 0.1;
    const auto m = extract_metrics(simulate(c, kParams.ssc, kParams.lcl), 10);
    const double ideal = c.m * c.v_dc / std::sqrt(2.0);
    CHECK(std::abs(m.v_bridge_rms - ideal) / ideal < 0.02);
    // the lossless bridge reproduces the ideal fundamental much more closely
    const auto ml = extract_metrics(simulate(c, kParams.lossless().ssc, kParams.lcl), 10);
    CHECK(std::abs(ml.v_bridge_rms - ideal) / ideal < 1e-3);
}

TEST_CASE("energy audit closes") {
    for (const TdLoad& load : {TdLoad{StiffGrid{}}, TdLoad{ResistiveLoad{8.0}}}) {
        TdConfig c;
        c.load = load;
        c.theta = 0.08;
        c.duration = 0.3;
        c.record_from = 0.1;
        const auto e = energy_audit(simulate(c, kParams.ssc, kParams.lcl));
        CHECK(e.devices > 0.0);
        CHECK(e.filter > 0.0);
        CHECK(std::abs(e.mismatch()) <= 0.005 * std::abs(e.source));
    }
}

TEST_CASE("leg on-fractions are complementary and bounded") {
    for (auto s : {Sampling::Midpoint, Sampling::Fractional}) {
        TdConfig c;
        c.sampling = s;
        c.duration = 0.05;
        c.record_from = 0.0;
        const auto w = simulate(c, kParams.ssc, kParams.lcl);
        for (std::size_t k = 0; k < w.n_steps(); ++k) {
            REQUIRE(w.s_a[k] >= 0.0);
            REQUIRE(w.s_a[k] <= 1.0);
            REQUIRE(w.s_b[k] >= 0.0);
            REQUIRE(w.s_b[k] <= 1.0);
            if (s == Sampling::Midpoint) REQUIRE((w.s_a[k] == 0.0 || w.s_a[k] == 1.0));
        }
    }
}

TEST_CASE("unstable filter aborts with the step index") {
    auto lcl = kParams.lcl;
    lcl.l2 = 1e-9;
    lcl.c = 1e-9;
    lcl.r_damp = 0.0;
    TdConfig c;
    c.duration = 0.01;
    c.record_from = 0.0;
    try {
        simulate(c, kParams.ssc, lcl);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("rectified sine through half-cycle gating") {
    const double w0 = 2.0 * inverter::kPi * 60.0;
    auto i = [&](double t) { return std::sqrt(2.0) * 10.0 * std::sin(w0 * t); };
    auto ga = [&](double t) { return std::sin(w0 * t) >= 0.0 ? 1.0 : 0.0; };
    auto gb = [&](double t) { return std::sin(w0 * t) >= 0.0 ? 0.0 : 1.0; };
    const auto m = extract_metrics(synthetic(5, i, ga, gb), 5);
    const double expect = 2.0 * std::sqrt(2.0) * 10.0 / (2.0 * inverter::kPi);
    CHECK(expect == doctest::Approx(4.502).epsilon(1e-4));
    for (int d = 0; d < 4; ++d) {
        CHECK(m.t_avg_each[d] == doctest::Approx(expect).epsilon(1e-5));
        CHECK(m.t_rms_each[d] == doctest::Approx(10.0 / std::sqrt(2.0)).epsilon(1e-5));
        CHECK(m.d_avg_each[d] < 1e-6);
    }
    CHECK(m.i_ac_rms == doctest::Approx(10.0).epsilon(1e-5));
}

TEST_CASE("dc waveform has equal mean and rms") {
    const double c = 3.5;
    auto i = [&](double) { return c; };
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    const auto m = extract_metrics(synthetic(5, i, one, zero), 5);
    // leg A upper and leg B lower carry the current the whole time
    CHECK(m.t_avg_each[0] == doctest::Approx(c).epsilon(1e-12));
    CHECK(m.t_rms_each[0] == doctest::Approx(c).epsilon(1e-12));
    CHECK(m.t_avg_each[3] == doctest::Approx(c).epsilon(1e-12));
    CHECK(m.t_rms_each[3] == doctest::Approx(c).epsilon(1e-12));
    CHECK(m.t_avg_each[1] == 0.0);
    CHECK(m.d_avg_each[0] == 0.0);
}

TEST_CASE("metrics window checks") {
    TdConfig c;
    c.duration = 0.1;
    c.record_from = 0.0;
    const auto w = simulate(c, kParams.ssc, kParams.lcl);
    CHECK_THROWS_AS(extract_metrics(w, 4), InputError);
    CHECK_THROWS_AS(extract_metrics(w, 7), InputError);
    CHECK_NOTHROW(extract_metrics(w, 6));
}

TEST_CASE("error table") {
    const std::array<double, 5> model{4.4612, 7.7975, 0.8893, 3.1363, 1.4567};
    const std::array<double, 5> td{4.4310, 7.8160, 0.8662, 3.0870, 1.4010};
    const auto rows = compare_with_steady_state(td, model);
    const std::array<double, 5> expect{0.68, 0.24, 2.67, 1.60, 3.97};
    for (int k = 0; k < 5; ++k) CHECK(std::abs(rows[k].error_pct - expect[k]) < 0.01);
    for (const auto& r : compare_with_steady_state(td, td)) CHECK(r.error_pct == 0.0);
    auto up = td;
    for (double& x : up) x *= 1.1;
    for (const auto& r : compare_with_steady_state(td, up)) CHECK(r.error_pct == doctest::Approx(10.0));
    CHECK(rows[0].quantity == "i_t_avg");
}

TEST_CASE("steady-state prediction of a lossless bridge matches the phasor circuit") {
    TdConfig c;
    c.theta = 0.1;
    const auto p = predict_steady_state(c, kParams.lossless().ssc, kParams.lcl);
    CHECK(p.p_cond == 0.0);
    // lossless filter too: dc power equals grid power
    auto lcl = kParams.lcl;
    lcl.r1 = lcl.r2 = lcl.r_damp = 0.0;
    const auto q = predict_steady_state(c, kParams.lossless().ssc, lcl);
    CHECK(q.p_dc == doctest::Approx(q.p_out).epsilon(1e-10));
}

TEST_CASE("model against the switching oracle at 1440 W") {
    const auto v = validate(TdConfig{}, kParams.ssc, kParams.lcl);
    CHECK(v.metrics.p_out_avg == doctest::Approx(1440.0).epsilon(1e-4));
    for (const auto& r : v.errors) {
        INFO(r.quantity);
        CHECK(r.error_pct <= 5.0);
    }
    const auto& m = v.metrics;
    CHECK(m.i_t_rms >= m.i_t_avg);
    CHECK(m.i_d_rms >= m.i_d_avg);
    const double lhs = m.i_t_rms * m.i_t_rms + m.i_d_rms * m.i_d_rms;
    CHECK(std::abs(lhs / (m.i_ac_rms * m.i_ac_rms / 2.0) - 1.0) < 0.03);

    auto half = v.config;
    half.dt = 0.5e-6;
    const auto m2 = extract_metrics(simulate(half, kParams.ssc, kParams.lcl), 18);
    for (auto [a, b] : {std::pair{m.i_t_avg, m2.i_t_avg}, {m.i_t_rms, m2.i_t_rms}, {m.i_d_avg, m2.i_d_avg},
                        {m.i_d_rms, m2.i_d_rms}, {m.v_cond, m2.v_cond}})
        CHECK(std::abs(b / a - 1.0) < 0.002);
}
