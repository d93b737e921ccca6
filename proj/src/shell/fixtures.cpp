#include "tsbi/fixtures.hpp"

#include <Eigen/Dense>
#include <numbers>
#include <random>

namespace tsbi::shell {

namespace {

constexpr double kShift = 2.0 * std::numbers::pi / 3.0;

net::NodeSpec slack(const std::string& id) {
    net::NodeSpec n;
    n.id = id;
    n.kind = net::NodeKind::Slack;
    for (int p = 0; p < 3; ++p) n.slack_voltage.push_back(from_polar(1.0, -kShift * p));
    return n;
}

net::NodeSpec bus(const std::string& id) {
    net::NodeSpec n;
    n.id = id;
    return n;
}

solve::InverterSpec battery_at(const std::string& id, const std::string& node, net::Phase ph, double p,
                               const ctrl::QLaw& q_law, double s_rated = 10e3) {
    solve::InverterSpec inv;
    inv.id = id;
    inv.node = node;
    inv.phase = ph;
    der::BatteryDer b;
    b.params.v_oc_nom = 400.0;
    b.params.c_batt = 13.5e3 * 3600.0 / 400.0;
    b.params.r_int = 0.05;
    b.params.i_max = 50.0;
    inv.der = b;
    inv.params = inverter::default_params(s_rated, 400.0);
    inv.control.p_law = ctrl::ConstantP{p};
    inv.control.q_law = q_law;
    if (auto* vv = std::get_if<ctrl::VoltVar>(&inv.control.q_law)) {
        const double eps = vv->eps_vv;
        *vv = ctrl::VoltVar::default_curve(s_rated);
        vv->eps_vv = eps;
    }
    return inv;
}

solve::InverterSpec pv_at(const std::string& id, const std::string& node, net::Phase ph, int modules,
                          const ctrl::QLaw& q_law) {
    auto inv = battery_at(id, node, ph, 0.0, q_law);
    inv.der = der::PvDer{pv_string(modules)};
    inv.control.p_law = ctrl::Mppt{};
    return inv;
}

}  // namespace

net::BranchSpec line(const std::string& from, const std::string& to, std::complex<double> z_self,
                     std::complex<double> z_mutual) {
    Eigen::Matrix3cd z;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z(r, c) = r == c ? z_self : z_mutual;
    const Eigen::Matrix3cd y = z.inverse();
    net::BranchSpec b;
    b.from = from;
    b.to = to;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            b.g_block[r][c] = y(r, c).real();
            b.b_block[r][c] = y(r, c).imag();
        }
    return b;
}

der::PvParams pv_string(int modules) {
    auto p = der::lg400_fixture();
    p.n_s *= modules;
    p.r_s *= modules;
    p.r_sh *= modules;
    return p;
}

ScenarioFile feeder4(const ctrl::QLaw& q_law) {
    ScenarioFile s;
    s.nodes = {slack("sub"), bus("n1"), bus("n2"), bus("n3")};
    const std::complex<double> zs(0.02, 0.03), zm(0.004, 0.01);
    s.branches = {line("sub", "n1", zs, zm), line("n1", "n2", zs, zm), line("n2", "n3", zs, zm)};
    for (const char* n : {"n1", "n2", "n3"})
        for (auto ph : {net::Phase::A, net::Phase::B, net::Phase::C}) s.loads.push_back({n, ph, 1500.0, 450.0});
    s.inverters = {battery_at("bat_a", "n3", net::Phase::A, 9000.0, q_law),
                   pv_at("pv_b", "n2", net::Phase::B, 10, q_law),
                   battery_at("bat_c", "n3", net::Phase::C, 7000.0, q_law)};
    return s;
}

ScenarioFile voltvar10() {
    ScenarioFile s;
    s.nodes.push_back(slack("sub"));
    for (int k = 1; k <= 9; ++k) s.nodes.push_back(bus("n" + std::to_string(k)));
    const std::complex<double> zs(0.01, 0.02), zm(0.002, 0.006);
    // trunk sub-n1-n2-n3-n4-n5, lateral n2-n6-n7, lateral n3-n8-n9
    const std::vector<std::pair<std::string, std::string>> edges{{"sub", "n1"}, {"n1", "n2"}, {"n2", "n3"},
                                                                  {"n3", "n4"}, {"n4", "n5"}, {"n2", "n6"},
                                                                  {"n6", "n7"}, {"n3", "n8"}, {"n8", "n9"}};
    for (const auto& [a, b] : edges) s.branches.push_back(line(a, b, zs, zm));
    for (int k = 1; k <= 9; ++k)
        for (auto ph : {net::Phase::A, net::Phase::B, net::Phase::C})
            s.loads.push_back({"n" + std::to_string(k), ph, 1000.0 + 100.0 * k, 300.0});
    const ctrl::VoltVar vv;
    s.inverters = {battery_at("vv1", "n5", net::Phase::A, 8000.0, vv), battery_at("vv2", "n7", net::Phase::B, 6000.0, vv),
                   pv_at("vv3", "n9", net::Phase::C, 10, vv), battery_at("vv4", "n4", net::Phase::B, -4000.0, vv),
                   battery_at("vv5", "n8", net::Phase::A, 5000.0, vv)};
    return s;
}

ScenarioFile synthetic_feeder(int nodes, int inverters, const ctrl::QLaw& q_law, std::uint64_t seed) {
    ScenarioFile s;
    s.base.s_base = 100e3;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // trunk of ~sqrt(n) nodes, each carrying a lateral of equal length
    const int trunk = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nodes - 1))));
    const int lateral = std::max(0, (nodes - 1) / trunk - 1);
    s.nodes.push_back(slack("sub"));
    const std::complex<double> zt(0.001, 0.002), zl(0.012, 0.012), zm(0.0002, 0.0006);
    std::vector<std::string> far;
    std::string prev = "sub";
    int count = 1;
    for (int t = 0; t < trunk && count < nodes; ++t) {
        const std::string tid = "t" + std::to_string(t);
        s.nodes.push_back(bus(tid));
        s.branches.push_back(line(prev, tid, zt, zm));
        ++count;
        prev = tid;
        std::string lprev = tid;
        for (int l = 0; l < lateral && count < nodes; ++l) {
            const std::string lid = tid + "_" + std::to_string(l);
            s.nodes.push_back(bus(lid));
            s.branches.push_back(line(lprev, lid, zl, 0.25 * zm));
            ++count;
            lprev = lid;
            if (l >= lateral / 2) far.push_back(lid);
        }
    }
    while (count < nodes) {  // remainder extends the trunk
        const std::string tid = "x" + std::to_string(count);
        s.nodes.push_back(bus(tid));
        s.branches.push_back(line(prev, tid, zt, zm));
        prev = tid;
        ++count;
    }
    for (std::size_t k = 1; k < s.nodes.size(); ++k)
        for (auto ph : {net::Phase::A, net::Phase::B, net::Phase::C}) {
            const double p = 100.0 + 300.0 * u(rng);
            s.loads.push_back({s.nodes[k].id, ph, p, 0.3 * p});
        }
    // inverters spread evenly over the far halves of the laterals
    for (int k = 0; k < inverters && !far.empty(); ++k) {
        const auto& node = far[(static_cast<std::size_t>(k) * far.size()) / static_cast<std::size_t>(inverters)];
        const auto ph = static_cast<net::Phase>(k % 3);
        const std::string id = "inv" + std::to_string(k);
        if (k % 4 == 3)
            s.inverters.push_back(pv_at(id, node, ph, 10, q_law));
        else
            s.inverters.push_back(battery_at(id, node, ph, 6000.0 + 3000.0 * u(rng), q_law));
    }
    return s;
}

double dead_band_distance(double v, const ctrl::VoltVar& vv) {
    if (v < vv.v2) return vv.v2 - v;
    if (v > vv.v3) return v - vv.v3;
    return 0.0;
}

}  // namespace tsbi::shell
