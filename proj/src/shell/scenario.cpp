#include "tsbi/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tsbi/errors.hpp"

namespace tsbi::shell {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Field reader over one JSON object that remembers which keys were used.
class Obj {
  public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InputError(path_ + ": expected an object");
    }

    const std::string& path() const { return path_; }
    std::string at_path(const std::string& k) const { return path_ + "." + k; }
    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        if (!has(k)) throw InputError(path_ + ": missing field '" + k + "'");
        seen_.insert(k);
        return j_.at(k);
    }

    double num(const std::string& k, double def) { return has(k) ? num(k) : def; }
    double num(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number()) throw InputError(at_path(k) + ": expected a number");
        return v.get<double>();
    }
    int integer(const std::string& k, int def) {
        if (!has(k)) return def;
        const auto& v = raw(k);
        if (!v.is_number_integer()) throw InputError(at_path(k) + ": expected an integer");
        return v.get<int>();
    }
    bool boolean(const std::string& k, bool def) {
        if (!has(k)) return def;
        const auto& v = raw(k);
        if (!v.is_boolean()) throw InputError(at_path(k) + ": expected true or false");
        return v.get<bool>();
    }
    std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : def; }
    std::string str(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_string()) throw InputError(at_path(k) + ": expected a string");
        return v.get<std::string>();
    }
    Obj obj(const std::string& k) { return Obj(raw(k), at_path(k)); }
    const json& array(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_array()) throw InputError(at_path(k) + ": expected an array");
        return v;
    }

    void done() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw InputError(path_ + ": unknown field '" + k + "'");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> numbers(const json& a, const std::string& path) {
    if (!a.is_array()) throw InputError(path + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw InputError(path + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(a[i].get<double>());
    }
    return out;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// ----- inverter parameters

void read_timing(Obj& o, inverter::SwitchTiming& t) {
    if (!o.has("timing")) return;
    auto ob = o.obj("timing");
    t.t_delay_on = ob.num("t_delay_on", t.t_delay_on);
    t.t_rise = ob.num("t_rise", t.t_rise);
    t.t_delay_off = ob.num("t_delay_off", t.t_delay_off);
    t.t_fall = ob.num("t_fall", t.t_fall);
    ob.done();
}

inverter::MosfetPreset switch_preset(const std::string& name, const std::string& path) {
    if (name == "mosfet_spw47n60c3") return inverter::mosfet_spw47n60c3();
    throw InputError(path + ": unknown switch preset '" + name + "'");
}

inverter::DiodePreset diode_preset(const std::string& name, const std::string& path) {
    if (name == "diode_mur460") return inverter::diode_mur460();
    throw InputError(path + ": unknown diode preset '" + name + "'");
}

inverter::TsbiParams read_params(Obj& o) {
    const double s_rated = o.num("s_rated", 10e3);
    const double v_dc = o.num("v_dc", 400.0);
    auto p = inverter::default_params(s_rated, v_dc);
    p.eps_sgn = o.num("eps_sgn", p.eps_sgn);
    p.eps_mag = o.num("eps_mag", p.eps_mag);
    p.eps_mcos = o.num("eps_mcos", p.eps_mcos);
    if (o.has("fsc")) {
        auto f = o.obj("fsc");
        if (f.has("switch")) {
            const auto sw = switch_preset(f.str("switch"), f.at_path("switch"));
            p.fsc.v_t0 = sw.v_t0;
            p.fsc.r_t = sw.r_t;
            p.fsc.timing = sw.timing;
        }
        p.fsc.v_t0 = f.num("v_t0", p.fsc.v_t0);
        p.fsc.r_t = f.num("r_t", p.fsc.r_t);
        p.fsc.r_l = f.num("r_l", p.fsc.r_l);
        read_timing(f, p.fsc.timing);
        p.fsc.f_sw = f.num("f_sw", p.fsc.f_sw);
        f.done();
    }
    if (o.has("ssc")) {
        auto f = o.obj("ssc");
        if (f.has("switch")) {
            const auto sw = switch_preset(f.str("switch"), f.at_path("switch"));
            p.ssc.v_t = sw.v_t0;
            p.ssc.r_t = sw.r_t;
            p.ssc.timing = sw.timing;
        }
        if (f.has("diode")) {
            const auto d = diode_preset(f.str("diode"), f.at_path("diode"));
            p.ssc.v_d = d.v_d0;
            p.ssc.r_d = d.r_d;
            p.ssc.t_doff = d.t_rr;
        }
        p.ssc.v_t = f.num("v_t", p.ssc.v_t);
        p.ssc.r_t = f.num("r_t", p.ssc.r_t);
        p.ssc.v_d = f.num("v_d", p.ssc.v_d);
        p.ssc.r_d = f.num("r_d", p.ssc.r_d);
        read_timing(f, p.ssc.timing);
        p.ssc.t_doff = f.num("t_doff", p.ssc.t_doff);
        p.ssc.f_sw = f.num("f_sw", p.ssc.f_sw);
        f.done();
    }
    if (o.has("lcl")) {
        auto f = o.obj("lcl");
        if (f.has("preset")) {
            const auto name = f.str("preset");
            if (name != "lcl_reznik") throw InputError(f.at_path("preset") + ": unknown filter preset '" + name + "'");
            p.lcl = inverter::lcl_reznik();
        }
        p.lcl.l1 = f.num("l1", p.lcl.l1);
        p.lcl.l2 = f.num("l2", p.lcl.l2);
        p.lcl.c = f.num("c", p.lcl.c);
        p.lcl.r_damp = f.num("r_damp", p.lcl.r_damp);
        p.lcl.r1 = f.num("r1", p.lcl.r1);
        p.lcl.r2 = f.num("r2", p.lcl.r2);
        p.lcl.omega = f.num("omega", p.lcl.omega);
        f.done();
    }
    o.done();
    try {
        p.validate();
    } catch (const InputError& e) {
        throw InputError(o.path() + ": " + e.what());
    }
    return p;
}

ojson write_timing(const inverter::SwitchTiming& t) {
    return {{"t_delay_on", t.t_delay_on}, {"t_rise", t.t_rise}, {"t_delay_off", t.t_delay_off}, {"t_fall", t.t_fall}};
}

ojson write_params(const inverter::TsbiParams& p) {
    ojson j;
    j["s_rated"] = p.s_rated;
    j["v_dc"] = p.v_dc;
    j["eps_sgn"] = p.eps_sgn;
    j["eps_mag"] = p.eps_mag;
    j["eps_mcos"] = p.eps_mcos;
    j["fsc"] = {{"v_t0", p.fsc.v_t0}, {"r_t", p.fsc.r_t},   {"r_l", p.fsc.r_l},
                {"timing", write_timing(p.fsc.timing)}, {"f_sw", p.fsc.f_sw}};
    j["ssc"] = {{"v_t", p.ssc.v_t},     {"r_t", p.ssc.r_t},
                {"v_d", p.ssc.v_d},     {"r_d", p.ssc.r_d},
                {"timing", write_timing(p.ssc.timing)}, {"t_doff", p.ssc.t_doff},
                {"f_sw", p.ssc.f_sw}};
    j["lcl"] = {{"l1", p.lcl.l1},         {"l2", p.lcl.l2}, {"c", p.lcl.c},
                {"r_damp", p.lcl.r_damp}, {"r1", p.lcl.r1}, {"r2", p.lcl.r2},
                {"omega", p.lcl.omega}};
    return j;
}

// ----- DER and control

der::BatteryParams read_battery(Obj& o) {
    der::BatteryParams b;
    b.c_batt = o.num("c_batt", b.c_batt);
    b.v_oc_nom = o.num("v_oc_nom", b.v_oc_nom);
    b.r_int = o.num("r_int", b.r_int);
    b.soc_min = o.num("soc_min", b.soc_min);
    b.soc_max = o.num("soc_max", b.soc_max);
    b.i_max = o.num("i_max", b.i_max);
    if (o.has("voc_curve")) {
        auto c = o.obj("voc_curve");
        b.voc_curve = der::AffineVoc{c.num("a"), c.num("b")};
        c.done();
    }
    return b;
}

ojson write_battery(const der::BatteryParams& b) {
    ojson j{{"c_batt", b.c_batt}, {"v_oc_nom", b.v_oc_nom}, {"r_int", b.r_int}, {"soc_min", b.soc_min},
            {"soc_max", b.soc_max}, {"i_max", b.i_max}};
    if (b.voc_curve) j["voc_curve"] = {{"a", b.voc_curve->a}, {"b", b.voc_curve->b}};
    return j;
}

der::DerDevice read_der(Obj o) {
    const auto type = o.str("type");
    if (type == "battery") {
        der::BatteryDer d;
        d.params = read_battery(o);
        d.state.soc = o.num("soc", d.state.soc);
        o.done();
        try {
            d.params.validate();
        } catch (const InputError& e) {
            throw InputError(o.path() + ": " + e.what());
        }
        return d;
    }
    if (type == "pv") {
        der::PvDer d;
        if (o.has("preset")) {
            const auto name = o.str("preset");
            if (name != "lg400") throw InputError(o.at_path("preset") + ": unknown PV preset '" + name + "'");
            d.params = der::lg400_fixture();
        }
        auto& p = d.params;
        p.i_ph = o.num("i_ph", p.i_ph);
        p.i_0 = o.num("i_0", p.i_0);
        p.r_s = o.num("r_s", p.r_s);
        p.r_sh = o.num("r_sh", p.r_sh);
        p.n_d = o.num("n_d", p.n_d);
        p.n_s = o.num("n_s", p.n_s);
        p.v_t = o.num("v_t", p.v_t);
        o.done();
        try {
            p.validate();
        } catch (const InputError& e) {
            throw InputError(o.path() + ": " + e.what());
        }
        return d;
    }
    throw InputError(o.at_path("type") + ": unknown DER type '" + type + "'");
}

ojson write_der(const der::DerDevice& d) {
    if (const auto* b = std::get_if<der::BatteryDer>(&d)) {
        ojson j{{"type", "battery"}};
        j.update(write_battery(b->params));
        j["soc"] = b->state.soc;
        return j;
    }
    const auto& p = std::get<der::PvDer>(d).params;
    return {{"type", "pv"}, {"i_ph", p.i_ph}, {"i_0", p.i_0}, {"r_s", p.r_s}, {"r_sh", p.r_sh},
            {"n_d", p.n_d},   {"n_s", p.n_s},   {"v_t", p.v_t}};
}

ctrl::ControlSpec read_control(Obj o, double s_rated) {
    ctrl::ControlSpec c;
    if (o.has("p")) {
        auto p = o.obj("p");
        const auto type = p.str("type");
        if (type == "constant_p")
            c.p_law = ctrl::ConstantP{p.num("p_set")};
        else if (type == "mppt")
            c.p_law = ctrl::Mppt{};
        else
            throw InputError(p.at_path("type") + ": unknown active-power law '" + type + "'");
        p.done();
    }
    if (o.has("q")) {
        auto q = o.obj("q");
        const auto type = q.str("type");
        if (type == "constant_q") {
            c.q_law = ctrl::ConstantQ{q.num("q_set")};
        } else if (type == "constant_pf") {
            ctrl::ConstantPF pf;
            pf.pf = q.num("pf");
            const auto sign = q.str("sign", "lagging");
            if (sign == "lagging")
                pf.sign = ctrl::PfSign::Lagging;
            else if (sign == "leading")
                pf.sign = ctrl::PfSign::Leading;
            else
                throw InputError(q.at_path("sign") + ": expected 'lagging' or 'leading'");
            c.q_law = pf;
        } else if (type == "volt_var") {
            auto vv = ctrl::VoltVar::default_curve(s_rated);
            vv.v1 = q.num("v1", vv.v1);
            vv.v2 = q.num("v2", vv.v2);
            vv.v3 = q.num("v3", vv.v3);
            vv.v4 = q.num("v4", vv.v4);
            vv.q_max = q.num("q_max", vv.q_max);
            vv.q_min = q.num("q_min", vv.q_min);
            vv.eps_vv = q.num("eps_vv", vv.eps_vv);
            c.q_law = vv;
        } else {
            throw InputError(q.at_path("type") + ": unknown reactive-power law '" + type + "'");
        }
        q.done();
    }
    o.done();
    return c;
}

ojson write_control(const ctrl::ControlSpec& c) {
    ojson j;
    if (const auto* cp = std::get_if<ctrl::ConstantP>(&c.p_law))
        j["p"] = {{"type", "constant_p"}, {"p_set", cp->p_set}};
    else
        j["p"] = {{"type", "mppt"}};
    if (const auto* cq = std::get_if<ctrl::ConstantQ>(&c.q_law)) {
        j["q"] = {{"type", "constant_q"}, {"q_set", cq->q_set}};
    } else if (const auto* pf = std::get_if<ctrl::ConstantPF>(&c.q_law)) {
        j["q"] = {{"type", "constant_pf"}, {"pf", pf->pf}, {"sign", pf->sign == ctrl::PfSign::Lagging ? "lagging" : "leading"}};
    } else {
        const auto& vv = std::get<ctrl::VoltVar>(c.q_law);
        j["q"] = {{"type", "volt_var"}, {"v1", vv.v1},       {"v2", vv.v2},       {"v3", vv.v3},
                  {"v4", vv.v4},        {"q_max", vv.q_max}, {"q_min", vv.q_min}, {"eps_vv", vv.eps_vv}};
    }
    return j;
}

// ----- network pieces

net::Block3 read_block(const json& a, const std::string& path) {
    net::Block3 b{};
    if (!a.is_array() || a.size() != 3) throw InputError(path + ": expected a 3x3 array");
    for (std::size_t r = 0; r < 3; ++r) {
        const auto row = numbers(a[r], idx(path, r));
        if (row.size() != 3) throw InputError(idx(path, r) + ": expected 3 numbers");
        for (std::size_t c = 0; c < 3; ++c) b[r][c] = row[c];
    }
    return b;
}

ojson write_block(const net::Block3& b) {
    ojson a = ojson::array();
    for (const auto& row : b) a.push_back(ojson::array({row[0], row[1], row[2]}));
    return a;
}

net::Phase read_phase(Obj& o, const std::string& k) {
    const auto s = o.str(k);
    if (s.size() != 1) throw InputError(o.at_path(k) + ": expected one of a, b, c");
    try {
        return net::parse_phase(s[0]);
    } catch (const InputError&) {
        throw InputError(o.at_path(k) + ": expected one of a, b, c");
    }
}

std::string phase_str(net::Phase p) { return std::string(1, net::phase_letter(p)); }

}  // namespace

net::NetworkModel ScenarioFile::network() const { return net::NetworkModel(base, nodes, branches, loads); }

ScenarioFile parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("scenario: JSON syntax error: ") + e.what());
    }
    Obj top(root, "scenario");
    ScenarioFile s;
    if (top.has("base")) {
        auto b = top.obj("base");
        s.base.s_base = b.num("s_base", s.base.s_base);
        s.base.v_base = b.num("v_base", s.base.v_base);
        s.base.freq = b.num("freq", s.base.freq);
        b.done();
    }
    const auto& nodes = top.array("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Obj o(nodes[i], idx("scenario.nodes", i));
        net::NodeSpec n;
        n.id = o.str("id");
        if (o.has("phases")) {
            try {
                n.phases = net::parse_phase_set(o.str("phases"));
            } catch (const InputError& e) {
                throw InputError(o.at_path("phases") + ": " + e.what());
            }
        }
        const auto kind = o.str("kind", "load");
        if (kind == "slack")
            n.kind = net::NodeKind::Slack;
        else if (kind != "load")
            throw InputError(o.at_path("kind") + ": expected 'slack' or 'load'");
        if (o.has("slack_voltage")) {
            const auto& a = o.array("slack_voltage");
            for (std::size_t k = 0; k < a.size(); ++k) {
                const auto v = numbers(a[k], idx(o.at_path("slack_voltage"), k));
                if (v.size() != 2) throw InputError(idx(o.at_path("slack_voltage"), k) + ": expected [re, im]");
                n.slack_voltage.push_back({v[0], v[1]});
            }
        }
        o.done();
        s.nodes.push_back(std::move(n));
    }
    if (top.has("branches")) {
        const auto& a = top.array("branches");
        for (std::size_t i = 0; i < a.size(); ++i) {
            Obj o(a[i], idx("scenario.branches", i));
            net::BranchSpec b;
            b.from = o.str("from");
            b.to = o.str("to");
            if (o.has("g")) b.g_block = read_block(o.raw("g"), o.at_path("g"));
            if (o.has("b")) b.b_block = read_block(o.raw("b"), o.at_path("b"));
            o.done();
            s.branches.push_back(b);
        }
    }
    if (top.has("loads")) {
        const auto& a = top.array("loads");
        for (std::size_t i = 0; i < a.size(); ++i) {
            Obj o(a[i], idx("scenario.loads", i));
            net::LoadSpec l;
            l.node = o.str("node");
            l.phase = read_phase(o, "phase");
            l.p = o.num("p", 0.0);
            l.q = o.num("q", 0.0);
            o.done();
            s.loads.push_back(l);
        }
    }
    if (top.has("inverters")) {
        const auto& a = top.array("inverters");
        for (std::size_t i = 0; i < a.size(); ++i) {
            Obj o(a[i], idx("scenario.inverters", i));
            solve::InverterSpec inv;
            inv.id = o.str("id");
            inv.node = o.str("node");
            inv.phase = read_phase(o, "phase");
            if (o.has("params")) {
                auto po = o.obj("params");
                inv.params = read_params(po);
            }
            inv.der = read_der(o.obj("der"));
            if (o.has("control")) inv.control = read_control(o.obj("control"), inv.params.s_rated);
            o.done();
            try {
                inv.control.validate_for(inv.der);
            } catch (const InputError& e) {
                throw InputError(o.path() + ": " + e.what());
            }
            s.inverters.push_back(std::move(inv));
        }
    }
    if (top.has("solver")) {
        auto o = top.obj("solver");
        s.solver.tol_inf = o.num("tol_inf", s.solver.tol_inf);
        s.solver.max_iter = o.integer("max_iter", s.solver.max_iter);
        s.solver.damping = o.num("damping", s.solver.damping);
        s.solver.step_limit_v = o.num("step_limit_v", s.solver.step_limit_v);
        s.solver.flat_start = o.boolean("flat_start", s.solver.flat_start);
        const auto init = o.str("init", "flat");
        if (init == "flat")
            s.solver.init = solve::InitMode::Flat;
        else if (init == "consistent")
            s.solver.init = solve::InitMode::Consistent;
        else
            throw InputError(o.at_path("init") + ": expected 'flat' or 'consistent'");
        o.done();
        try {
            s.solver.validate();
        } catch (const InputError& e) {
            throw InputError(o.path() + ": " + e.what());
        }
    }
    top.done();

    // referential integrity, reported with the JSON path
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
        if (!ids.insert(s.nodes[i].id).second)
            throw InputError(idx("scenario.nodes", i) + ".id: duplicate node id '" + s.nodes[i].id + "'");
    for (std::size_t i = 0; i < s.branches.size(); ++i)
        for (const auto* end : {&s.branches[i].from, &s.branches[i].to})
            if (!ids.count(*end)) throw InputError(idx("scenario.branches", i) + ": unknown node '" + *end + "'");
    for (std::size_t i = 0; i < s.loads.size(); ++i)
        if (!ids.count(s.loads[i].node))
            throw InputError(idx("scenario.loads", i) + ": unknown node '" + s.loads[i].node + "'");
    for (std::size_t i = 0; i < s.inverters.size(); ++i)
        if (!ids.count(s.inverters[i].node))
            throw InputError(idx("scenario.inverters", i) + ": unknown node '" + s.inverters[i].node + "'");
    (void)s.network();  // remaining structural checks
    return s;
}

std::string serialize_scenario(const ScenarioFile& s) {
    ojson root;
    root["base"] = {{"s_base", s.base.s_base}, {"v_base", s.base.v_base}, {"freq", s.base.freq}};
    root["nodes"] = ojson::array();
    for (const auto& n : s.nodes) {
        ojson j{{"id", n.id},
                {"phases", net::format_phase_set(n.phases)},
                {"kind", n.kind == net::NodeKind::Slack ? "slack" : "load"}};
        if (!n.slack_voltage.empty()) {
            j["slack_voltage"] = ojson::array();
            for (const auto& v : n.slack_voltage) j["slack_voltage"].push_back(ojson::array({v.re, v.im}));
        }
        root["nodes"].push_back(j);
    }
    root["branches"] = ojson::array();
    for (const auto& b : s.branches)
        root["branches"].push_back({{"from", b.from}, {"to", b.to}, {"g", write_block(b.g_block)}, {"b", write_block(b.b_block)}});
    root["loads"] = ojson::array();
    for (const auto& l : s.loads)
        root["loads"].push_back({{"node", l.node}, {"phase", phase_str(l.phase)}, {"p", l.p}, {"q", l.q}});
    root["inverters"] = ojson::array();
    for (const auto& inv : s.inverters)
        root["inverters"].push_back({{"id", inv.id},
                                     {"node", inv.node},
                                     {"phase", phase_str(inv.phase)},
                                     {"der", write_der(inv.der)},
                                     {"control", write_control(inv.control)},
                                     {"params", write_params(inv.params)}});
    root["solver"] = {{"tol_inf", s.solver.tol_inf},
                      {"max_iter", s.solver.max_iter},
                      {"damping", s.solver.damping},
                      {"step_limit_v", s.solver.step_limit_v},
                      {"flat_start", s.solver.flat_start},
                      {"init", s.solver.init == solve::InitMode::Flat ? "flat" : "consistent"}};
    return root.dump(2) + "\n";
}

inverter::TsbiParams parse_params(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("params: JSON syntax error: ") + e.what());
    }
    Obj o(root, "params");
    return read_params(o);
}

std::string serialize_params(const inverter::TsbiParams& p) { return write_params(p).dump(2) + "\n"; }

dispatch::DispatchScenario parse_dispatch(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("dispatch: JSON syntax error: ") + e.what());
    }
    Obj o(root, "dispatch");
    dispatch::DispatchScenario s;
    s.dt = o.num("dt", s.dt);
    s.price = numbers(o.array("price"), o.at_path("price"));
    s.load_w = numbers(o.array("load_w"), o.at_path("load_w"));
    s.pv_w = numbers(o.array("pv_w"), o.at_path("pv_w"));
    if (o.has("battery")) {
        auto b = o.obj("battery");
        s.battery = read_battery(b);
        b.done();
    }
    s.soc0 = o.num("soc0", s.soc0);
    s.p_batt_max = o.num("p_batt_max", s.p_batt_max);
    if (o.has("inverter")) {
        auto p = o.obj("inverter");
        s.inverter = read_params(p);
    }
    if (o.has("model")) {
        auto m = o.obj("model");
        const auto type = m.str("type");
        if (type == "tsbi") {
            s.model = dispatch::TsbiModel{};
        } else if (type == "ce_cs") {
            dispatch::CeCs ce;
            ce.eta_c = m.num("eta_c", ce.eta_c);
            ce.eta_d = m.num("eta_d", ce.eta_d);
            ce.eps_cs = m.num("eps_cs", ce.eps_cs);
            s.model = ce;
        } else {
            throw InputError(m.at_path("type") + ": expected 'tsbi' or 'ce_cs'");
        }
        m.done();
    }
    o.done();
    try {
        s.validate();
    } catch (const InputError& e) {
        throw InputError(std::string("dispatch: ") + e.what());
    }
    return s;
}

std::string serialize_dispatch(const dispatch::DispatchScenario& s) {
    ojson root;
    root["dt"] = s.dt;
    root["price"] = s.price;
    root["load_w"] = s.load_w;
    root["pv_w"] = s.pv_w;
    root["battery"] = write_battery(s.battery);
    root["soc0"] = s.soc0;
    root["p_batt_max"] = s.p_batt_max;
    root["inverter"] = write_params(s.inverter);
    if (const auto* ce = std::get_if<dispatch::CeCs>(&s.model))
        root["model"] = {{"type", "ce_cs"}, {"eta_c", ce->eta_c}, {"eta_d", ce->eta_d}, {"eps_cs", ce->eps_cs}};
    else
        root["model"] = {{"type", "tsbi"}};
    return root.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace tsbi::shell
