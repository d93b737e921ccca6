#include "doctest.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tsbi/csv.hpp"
#include "tsbi/errors.hpp"
#include "tsbi/fixtures.hpp"
#include "tsbi/shell.hpp"

using namespace tsbi;
using namespace tsbi::shell;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("tsbi_test_shell_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

double parse(const std::string& s) {
    double x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    REQUIRE(r.ec == std::errc{});
    return x;
}

std::string expect_input_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const InputError& e) {
        return e.what();
    }
    FAIL("no InputError raised");
    return {};
}

ctrl::ConstantPF upf() { return {1.0, ctrl::PfSign::Lagging}; }

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20000; ++k) {
        const double x = std::bit_cast<double>(rng());
        if (!std::isfinite(x)) continue;
        const double y = parse(format_double(x));
        CHECK(std::bit_cast<std::uint64_t>(y) == std::bit_cast<std::uint64_t>(x));
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e300) == "1e+300");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("csv writer layout") {
    CsvWriter w({"a", "b"});
    w.cell(1).cell(2.5);
    w.end_row();
    w.cell("x").cell(std::size_t{7});
    w.end_row();
    CHECK(w.str() == "a,b\n1,2.5\nx,7\n");
}

TEST_CASE("scenario round trip is the identity") {
    std::vector<ScenarioFile> all{feeder4(), feeder4(upf()), feeder4(ctrl::VoltVar{}), voltvar10(),
                                  synthetic_feeder(60, 6, ctrl::VoltVar{})};
    for (const auto& s : all) {
        const auto text = serialize_scenario(s);
        const auto back = parse_scenario(text);
        CHECK(back == s);
        CHECK(serialize_scenario(back) == text);
    }
    const auto p = inverter::default_params(7600.0);
    CHECK(parse_params(serialize_params(p)) == p);
    for (const auto& d : {dispatch::synthetic_day(dispatch::TsbiModel{}), dispatch::synthetic_day(dispatch::CeCs{})}) {
        CHECK(parse_dispatch(serialize_dispatch(d)) == d);
    }
}

TEST_CASE("strict schema names the offending path") {
    auto j = nlohmann::json::parse(serialize_scenario(feeder4()));
    j["inverters"][2]["params"]["fsc"]["vt0"] = 1.0;
    auto msg = expect_input_error(j.dump());
    CHECK(msg.find("inverters[2].params.fsc") != std::string::npos);
    CHECK(msg.find("unknown field 'vt0'") != std::string::npos);

    j = nlohmann::json::parse(serialize_scenario(feeder4()));
    j["loads"][0]["node"] = "nowhere";
    msg = expect_input_error(j.dump());
    CHECK(msg.find("nowhere") != std::string::npos);

    j = nlohmann::json::parse(serialize_scenario(feeder4()));
    j["inverters"][0]["params"]["ssc"]["r_d"] = "big";
    msg = expect_input_error(j.dump());
    CHECK(msg.find("inverters[0].params.ssc.r_d") != std::string::npos);

    msg = expect_input_error("{\"base\": ");
    CHECK(msg.find("JSON syntax error") != std::string::npos);

    j = nlohmann::json::parse(serialize_scenario(feeder4()));
    j["inverters"][0]["params"]["fsc"] = {{"switch", "no_such_part"}};
    msg = expect_input_error(j.dump());
    CHECK(msg.find("unknown switch preset") != std::string::npos);
}

TEST_CASE("named presets reproduce the default components") {
    auto j = nlohmann::json::parse(serialize_scenario(feeder4()));
    auto& params = j["inverters"][0]["params"];
    const double s_rated = params["s_rated"];
    params = {{"s_rated", s_rated},
              {"fsc", {{"switch", "mosfet_spw47n60c3"}}},
              {"ssc", {{"switch", "mosfet_spw47n60c3"}, {"diode", "diode_mur460"}}},
              {"lcl", {{"preset", "lcl_reznik"}}}};
    const auto s = parse_scenario(j.dump());
    CHECK(s.inverters[0].params == inverter::default_params(s_rated));
}

TEST_CASE("power flow artifacts and exit codes") {
    const auto dir = temp_dir("pf");
    std::filesystem::create_directories(dir);
    const auto scn = (dir / "feeder4.json").string();
    write_file(scn, serialize_scenario(feeder4(upf())));

    CHECK(cmd_pf(scn, (dir / "ok").string(), {}) == kOk);
    for (const char* f : {"voltages.csv", "inverters.csv", "trace.csv"}) CHECK(std::filesystem::exists(dir / "ok" / f));

    CHECK(cmd_pf((dir / "missing.json").string(), (dir / "x").string(), {}) == kInputError);
    write_file((dir / "bad.json").string(), "{\"nodes\": []");
    CHECK(cmd_pf((dir / "bad.json").string(), (dir / "x").string(), {}) == kInputError);

    Overrides tight;
    tight.max_iter = 1;
    CHECK(cmd_pf(scn, (dir / "short").string(), tight) == kNonConvergence);
    CHECK(std::filesystem::exists(dir / "short" / "voltages.csv"));
    CHECK(std::filesystem::exists(dir / "short" / "trace.csv"));

    Overrides bad;
    bad.tol = -1.0;
    CHECK(cmd_pf(scn, (dir / "x").string(), bad) == kInputError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("voltage csv reproduces the solved state") {
    const auto s = feeder4(ctrl::VoltVar{});
    const auto r = run_pf(s);
    REQUIRE(r.report.converged);
    CHECK(r.violations.empty());
    const auto rows = read_csv(r.voltages_csv);
    REQUIRE(rows.size() == 1 + s.network().node_phase_count());
    CHECK(rows[0][2] == "v_re_pu");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(parse(rows[k][2]) == r.report.state[2 * (k - 1)]);
        CHECK(parse(rows[k][3]) == r.report.state[2 * (k - 1) + 1]);
    }
    // Re-evaluating the residual at the re-ingested state gives the same norm.
    auto x = r.report.state;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        x[2 * (k - 1)] = parse(rows[k][2]);
        x[2 * (k - 1) + 1] = parse(rows[k][3]);
    }
    const auto net = s.network();
    const solve::PowerFlowSystem sys(net, s.inverters);
    CHECK(sys.residual_norm(x) == sys.residual_norm(r.report.state));
}

TEST_CASE("volt-var moves inverter buses toward the dead band") {
    const auto a = run_pf(feeder4(upf()));
    const auto vvs = feeder4(ctrl::VoltVar{});
    const auto b = run_pf(vvs);
    REQUIRE(a.report.converged);
    REQUIRE(b.report.converged);
    double da = 0, db = 0;
    int outside = 0;
    for (std::size_t k = 0; k < a.report.inverters.size(); ++k) {
        const auto& vv = std::get<ctrl::VoltVar>(vvs.inverters[k].control.q_law);
        const double x = dead_band_distance(std::hypot(a.report.inverters[k].v_t2.re, a.report.inverters[k].v_t2.im) /
                                                vvs.base.v_base, vv);
        const double y = dead_band_distance(std::hypot(b.report.inverters[k].v_t2.re, b.report.inverters[k].v_t2.im) /
                                                vvs.base.v_base, vv);
        CAPTURE(k);
        if (x > 0) {
            ++outside;
            CHECK(y < x);
        }
        da += x;
        db += y;
    }
    CHECK(outside >= 1);
    CHECK(db < da);
}

TEST_CASE("empty inverter list is a plain power flow") {
    auto s = feeder4();
    s.inverters.clear();
    const auto r = run_pf(s);
    CHECK(r.report.converged);
    CHECK(read_csv(r.inverters_csv).size() == 1);
    CHECK(read_csv(r.trace_csv).size() >= 2);
}

TEST_CASE("efficiency sweep grid") {
    const auto params = inverter::default_params();
    SweepSpec spec;
    spec.np = 4;
    spec.nq = 3;
    const auto r = run_sweep(params, 400.0, spec, 2);
    CHECK(r.failed == 0);
    const auto rows = read_csv(r.csv);
    REQUIRE(rows.size() == 13);
    // p-major: the first nq rows share the smallest P.
    CHECK(rows[1][0] == rows[3][0]);
    CHECK(rows[1][1] != rows[2][1]);
    CHECK(parse(rows[1][0]) == doctest::Approx(0.02 * params.s_rated));
    CHECK(parse(rows[2][2]) < parse(rows[5][2]));
    CHECK(run_sweep(params, 400.0, spec, 1).csv == r.csv);
    spec.np = 0;
    CHECK_THROWS_AS(run_sweep(params, 400.0, spec, 1), InputError);
    spec.np = 3;
    spec.p_max = 2 * params.s_rated;
    CHECK_THROWS_AS(run_sweep(params, 400.0, spec, 1), InputError);
}

TEST_CASE("mpp rows agree with the brute-force sweep") {
    const auto csv = run_mpp({{"lg400", der::lg400_fixture()}, {"string10", pv_string(10)}});
    const auto rows = read_csv(csv);
    REQUIRE(rows.size() == 3);
    CHECK(parse(rows[1][1]) == doctest::Approx(40.6).epsilon(0.01));
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::abs(parse(rows[k][8])) < 0.1);
}

TEST_CASE("jacobian check on the coupled fixtures") {
    for (const auto& s : {feeder4(ctrl::VoltVar{}), voltvar10()}) {
        const auto r = run_check_jacobian(s, 10, 5);
        CHECK(r.worst < 1e-5);
        CHECK(read_csv(r.csv).size() == 11);
    }
}

TEST_CASE("dispatch command writes both schedules") {
    const auto dir = temp_dir("dispatch");
    CHECK(cmd_dispatch("", dir.string(), "both", {}) == kOk);
    for (const char* f : {"schedule_tsbi.csv", "schedule_ce_cs.csv", "dispatch_summary.csv"})
        CHECK(std::filesystem::exists(dir / f));
    const auto summary = read_csv(read_file((dir / "dispatch_summary.csv").string()));
    REQUIRE(summary.size() == 3);
    CHECK(summary[1][0] == "tsbi");
    CHECK(parse(summary[1][3]) == 0.0);
    CHECK(cmd_dispatch("", dir.string(), "nope", {}) == kInputError);
    std::filesystem::remove_all(dir);
}
