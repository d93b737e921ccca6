#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "tsbi/errors.hpp"
#include "tsbi/solver.hpp"

using namespace tsbi;
using namespace tsbi::solve;

namespace {

net::Block3 single(std::complex<double> y, net::BranchSpec& br) {
    net::Block3 g{}, b{};
    g[0][0] = y.real();
    b[0][0] = y.imag();
    br.g_block = g;
    br.b_block = b;
    return g;
}

net::NetworkModel two_node(double load_w = 0.0) {
    net::NodeSpec s{"s", {true, false, false}, net::NodeKind::Slack, {{1.0, 0.0}}};
    net::NodeSpec n{"n", {true, false, false}, net::NodeKind::Load, {}};
    net::BranchSpec br{"s", "n", {}, {}};
    single(1.0 / std::complex<double>(0.01, 0.02), br);
    std::vector<net::LoadSpec> loads;
    if (load_w > 0) loads.push_back({"n", net::Phase::A, load_w, 0.2 * load_w});
    return net::NetworkModel({}, {s, n}, {br}, loads);
}

InverterSpec battery_inverter(double p_set, double q_set = 0.0) {
    InverterSpec inv;
    inv.id = "inv1";
    inv.node = "n";
    inv.control = {ctrl::ConstantP{p_set}, ctrl::ConstantQ{q_set}};
    return inv;
}

void check_audit(const InverterResult& r) {
    CHECK(std::abs(r.audit_mismatch()) <= 1e-6 * std::max(1.0, std::abs(r.p_t1)));
    CHECK(r.losses.min_component() >= -1e-9);
}

}  // namespace

TEST_CASE("plain power flow without inverters") {
    const auto net = two_node();
    const PowerFlowSystem sys(net, {});
    const auto rep = solve_power_flow(sys, {});
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
    CHECK(rep.state[2] == doctest::Approx(1.0));
}

TEST_CASE("loaded feeder converges") {
    const auto net = two_node(5000);
    const auto rep = solve_power_flow(net, {}, {});
    REQUIRE(rep.converged);
    CHECK(std::hypot(rep.state[2], rep.state[3]) < 1.0);
}

TEST_CASE("single battery inverter forward and reverse") {
    for (double p : {5000.0, -5000.0, 300.0, -300.0}) {
        CAPTURE(p);
        const auto net = two_node(3000);
        for (auto mode : {InitMode::Consistent, InitMode::Flat}) {
            SolverOptions o;
            o.init = mode;
            const auto rep = solve_power_flow(net, {battery_inverter(p, 0.1 * p)}, o);
            CAPTURE(rep.message);
            CAPTURE(static_cast<int>(mode));
            REQUIRE(rep.converged);
            const auto& r = rep.inverters[0];
            CHECK(r.p_t2 == doctest::Approx(p).epsilon(1e-6));
            CHECK(r.q_t2 == doctest::Approx(0.1 * p).epsilon(1e-6));
            check_audit(r);
            CHECK(r.losses.total() > 0.0);
            if (p > 0)
                CHECK(r.p_t1 > r.p_t2);
            else
                CHECK(std::abs(r.p_t1) < std::abs(r.p_t2));
            MESSAGE("p=" << p << " mode=" << static_cast<int>(mode) << " iters=" << rep.iterations
                         << " eta=" << r.efficiency() << " loss=" << r.losses.total());
        }
    }
}

TEST_CASE("analytic jacobian matches finite differences") {
    const auto net = two_node(3000);
    const PowerFlowSystem sys(net, {battery_inverter(4000, 500)});
    auto x = sys.initial_state(InitMode::Consistent);
    const Eigen::MatrixXd Ja(sys.jacobian(x));
    const Eigen::MatrixXd Jf = finite_diff_jacobian(sys, x);
    for (Eigen::Index i = 0; i < Ja.rows(); ++i) {
        const double scale = Ja.row(i).cwiseAbs().cwiseProduct(sys.col_scale().transpose()).maxCoeff();
        const double err = (Ja.row(i) - Jf.row(i)).cwiseAbs().cwiseProduct(sys.col_scale().transpose()).maxCoeff();
        CAPTURE(sys.equation_label(i));
        CHECK(err <= 1e-6 * scale);
    }
}

TEST_CASE("singular jacobian names the offending row") {
    // "iso" has no branch and two loads that cancel, so its KCL rows are identically zero.
    net::NodeSpec s{"s", {true, false, false}, net::NodeKind::Slack, {{1.0, 0.0}}};
    net::NodeSpec n{"n", {true, false, false}, net::NodeKind::Load, {}};
    net::NodeSpec iso{"iso", {true, false, false}, net::NodeKind::Load, {}};
    net::BranchSpec br{"s", "n", {}, {}};
    single(1.0 / std::complex<double>(0.01, 0.02), br);
    std::vector<net::LoadSpec> loads{{"n", net::Phase::A, 3000, 0}, {"iso", net::Phase::A, 1000, 0},
                                     {"iso", net::Phase::A, -1000, 0}};
    net::NetworkModel net({}, {s, n, iso}, {br}, loads);
    const auto rep = solve_power_flow(net, {}, {});
    CHECK_FALSE(rep.converged);
    CHECK(rep.message == "singular Jacobian: empty row kcl.re[iso.a]");
}

TEST_CASE("setpoint sensitivity agrees with re-solves") {
    const auto net = two_node(3000);
    SolverOptions o;
    o.tol_inf = 1e-12;
    const PowerFlowSystem a(net, {battery_inverter(4000)});
    const auto ra = solve_power_flow(a, o);
    REQUIRE(ra.converged);
    const auto dx = setpoint_sensitivity(a, ra.state, 0);
    const double h = 1.0;
    const auto rp = solve_power_flow(PowerFlowSystem(net, {battery_inverter(4000 + h)}), o);
    const auto rm = solve_power_flow(PowerFlowSystem(net, {battery_inverter(4000 - h)}), o);
    const std::size_t i = a.inverter_offset(0) + 1;
    CHECK(dx[i] == doctest::Approx((rp.state[i] - rm.state[i]) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("solver determinism") {
    const auto net = two_node(3000);
    const auto a = solve_power_flow(net, {battery_inverter(4000)}, {});
    const auto b = solve_power_flow(net, {battery_inverter(4000)}, {});
    CHECK(a.state == b.state);
    CHECK(a.residual_history == b.residual_history);
    for (std::size_t k = 1; k < a.residual_history.size(); ++k)
        CHECK(a.residual_history[k] <= a.residual_history[k - 1]);
}

TEST_CASE("pv with mppt") {
    const auto net = two_node(3000);
    InverterSpec inv;
    inv.id = "pv";
    inv.node = "n";
    inv.der = der::PvDer{der::lg400_fixture()};
    inv.control = {ctrl::Mppt{}, ctrl::ConstantPF{1.0, ctrl::PfSign::Lagging}};
    inv.params = inverter::default_params(1000.0);
    const auto rep = solve_power_flow(net, {inv}, {});
    CAPTURE(rep.message);
    REQUIRE(rep.converged);
    const auto m = der::solve_mpp(der::lg400_fixture());
    const auto& r = rep.inverters[0];
    CHECK(r.state.v_t1 == doctest::Approx(m.point.v_mp).epsilon(1e-3));
    CHECK(r.state.p_ctrl == doctest::Approx(r.p_t1 - r.losses.total()).epsilon(1e-9));
    check_audit(r);
}
