#include "doctest.h"

#include <cmath>
#include <random>

#include "tsbi/control.hpp"
#include "tsbi/errors.hpp"

using namespace tsbi;
using namespace tsbi::ctrl;

TEST_CASE("controlled current source") {
    auto i = ctrl_current<double>({1, 0}, 1, 0, 0);
    CHECK(i.re == doctest::Approx(1));
    CHECK(i.im == doctest::Approx(0));
    i = ctrl_current<double>({0, 1}, 0, 1, 0);
    CHECK(i.re == doctest::Approx(1));
    CHECK(i.im == doctest::Approx(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-300, 300);
    for (int k = 0; k < 100; ++k) {
        const Phasor v{u(rng), u(rng)};
        const double p = 30 * u(rng), q = 30 * u(rng);
        const auto c = ctrl_current<double>(v, p, q, 0);
        CHECK(dot(v, c) == doctest::Approx(p).epsilon(1e-12));
        CHECK(cross(v, c) == doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("active power laws") {
    ControlSpec cp{ConstantP{5000}, ConstantQ{}};
    der::DerDevice bat = der::BatteryDer{};
    CHECK(p_law_residual(cp, 5000.0, 50.0, 100.0, bat) == 0.0);
    CHECK(p_law_residual(cp, 4000.0, 50.0, 100.0, bat) == -1000.0);
    ControlSpec mp{Mppt{}, ConstantQ{}};
    CHECK_THROWS_AS(mp.validate_for(bat), InputError);
    der::DerDevice pv = der::PvDer{der::lg400_fixture()};
    CHECK_NOTHROW(mp.validate_for(pv));
    const auto m = der::solve_mpp(der::lg400_fixture());
    CHECK(std::abs(p_law_residual(mp, 0.0, m.point.v_mp, m.point.i_mp, pv)) < 1e-9);
}

TEST_CASE("reactive power laws") {
    ControlSpec upf{ConstantP{}, ConstantPF{1.0, PfSign::Lagging}};
    CHECK(q_law_residual(upf, 9000.0, 0.0, 1.0) == 0.0);
    CHECK(q_law_residual(upf, 9000.0, 10.0, 1.0) != 0.0);

    ControlSpec lag{ConstantP{}, ConstantPF{0.9, PfSign::Lagging}};
    const double q = 9000.0 * std::sqrt(1 - 0.81) / 0.9;
    CHECK(q == doctest::Approx(4358.898943540674));
    CHECK(q_law_residual(lag, 9000.0, q, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    ControlSpec lead{ConstantP{}, ConstantPF{0.9, PfSign::Leading}};
    CHECK(q_law_residual(lead, 9000.0, -q, 1.0) == doctest::Approx(0.0).epsilon(1e-9));

    ControlSpec cq{ConstantP{}, ConstantQ{-300}};
    CHECK(q_law_residual(cq, 0.0, -300.0, 1.0) == 0.0);

    const auto vv = VoltVar::default_curve(10e3);
    ControlSpec vq{ConstantP{}, vv};
    CHECK(std::abs(q_law_residual(vq, 0.0, 0.0, 1.0)) < 1e-3);
}

TEST_CASE("smooth volt-var curve") {
    const auto vv = VoltVar::default_curve(10e3);
    CHECK(vv.q_max == 2500.0);
    const double bound = voltvar_error_bound(vv);
    CHECK(bound == doctest::Approx((2500 / 0.08 + 2500 / 0.08) * 1e-4));

    CHECK(voltvar_q(vv, 0.5) == doctest::Approx(vv.q_max).epsilon(1e-6));
    CHECK(std::abs(voltvar_q(vv, 0.94) - 1250.0) <= bound);
    CHECK(std::abs(voltvar_q(vv, 1.0)) <= bound);

    double sup = 0.0, prev = 1e300;
    for (int k = 0; k <= 20000; ++k) {
        const double v = 0.8 + 0.4 * k / 20000.0;
        const double s = voltvar_q(vv, v);
        sup = std::max(sup, std::abs(s - voltvar_piecewise(vv, v)));
        CHECK(s <= prev + 1e-12);
        prev = s;
    }
    CHECK(sup <= bound);
    // the error shrinks like sqrt(eps)
    auto fine = vv;
    fine.eps_vv = 1e-12;
    CHECK(std::abs(voltvar_q(fine, vv.v2) - voltvar_piecewise(fine, vv.v2)) <= voltvar_error_bound(fine));
}

TEST_CASE("volt-var derivative is continuous across breakpoints") {
    const auto vv = VoltVar::default_curve(10e3);
    for (double b : {vv.v1, vv.v2, vv.v3, vv.v4}) {
        const auto l = voltvar_q(vv, Dual<1>::variable(b - 1e-9, 0)).d[0];
        const auto r = voltvar_q(vv, Dual<1>::variable(b + 1e-9, 0)).d[0];
        CHECK(std::abs(l - r) < 1e-3 * 2500 / 0.08);
    }
}

TEST_CASE("control validation") {
    ControlSpec s{ConstantP{}, ConstantPF{0.0, PfSign::Lagging}};
    CHECK_THROWS_AS(s.validate(), InputError);
    VoltVar vv;
    vv.v2 = 0.85;
    CHECK_THROWS_AS((ControlSpec{ConstantP{}, vv}.validate()), InputError);
    vv = VoltVar{};
    vv.q_max = -1;
    CHECK_THROWS_AS((ControlSpec{ConstantP{}, vv}.validate()), InputError);
}

TEST_CASE("apparent power check") {
    CHECK(apparent_power_check(9000, 0, 10000).ok);
    const auto c = apparent_power_check(9000, 4358.9, 10000);
    CHECK_FALSE(c.ok);
    CHECK(c.s_mag == doctest::Approx(10000.0).epsilon(2e-4));
    CHECK(apparent_power_check(0, 0, 10000).ok);
}
