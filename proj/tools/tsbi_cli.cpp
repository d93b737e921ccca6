#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "tsbi/csv.hpp"
#include "tsbi/errors.hpp"
#include "tsbi/fixtures.hpp"
#include "tsbi/log.hpp"
#include "tsbi/shell.hpp"

using namespace tsbi;

namespace {

void add_overrides(CLI::App* cmd, shell::Overrides& o) {
    cmd->add_option("--tol", o.tol, "Newton tolerance on the scaled residual (inf-norm)");
    cmd->add_option("--max-iter", o.max_iter, "Newton iteration cap");
    cmd->add_option("--eps-sgn", o.eps_sgn, "sign/abs smoothing parameter of the loss model");
    cmd->add_option("--eps-vv", o.eps_vv, "Volt-VAR smoothing parameter");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

int write_fixtures(const std::string& dir) {
    try {
        std::filesystem::create_directories(dir);
        auto out = [&](const std::string& name, const std::string& text) {
            write_file((std::filesystem::path(dir) / name).string(), text);
        };
        out("feeder4_upf.json", shell::serialize_scenario(shell::feeder4(ctrl::ConstantPF{1.0, ctrl::PfSign::Lagging})));
        out("feeder4_vv.json", shell::serialize_scenario(shell::feeder4(ctrl::VoltVar{})));
        out("voltvar10.json", shell::serialize_scenario(shell::voltvar10()));
        out("feeder1000_vv.json", shell::serialize_scenario(shell::synthetic_feeder(1000, 100, ctrl::VoltVar{})));
        out("params_default.json", shell::serialize_params(inverter::default_params()));
        out("dispatch_day.json", shell::serialize_dispatch(dispatch::synthetic_day()));
        return shell::kOk;
    } catch (const std::exception& e) {
        log::error(e.what());
        return shell::kInputError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    log::configure_from_env();
    CLI::App app{"Steady-state grid-tied inverter power flow, loss analysis and dispatch"};
    app.require_subcommand(1);

    shell::Overrides o;
    std::string scenario, out = "out";

    auto* pf = app.add_subcommand("pf", "solve a three-phase power flow with inverter models");
    pf->add_option("--scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    pf->add_option("--out", out, "output directory");
    add_overrides(pf, o);

    shell::SweepSpec spec;
    std::string params;
    auto* sw = app.add_subcommand("sweep-eff", "efficiency surface over a (P, Q) grid");
    sw->add_option("--scenario", params, "inverter parameter JSON (defaults to the 11.5 kW preset)")
        ->check(CLI::ExistingFile);
    sw->add_option("--out", out, "output directory");
    sw->add_option("--p-min", spec.p_min, "W");
    sw->add_option("--p-max", spec.p_max, "W");
    sw->add_option("--np", spec.np, "P grid points")->check(CLI::PositiveNumber);
    sw->add_option("--q-min", spec.q_min, "var");
    sw->add_option("--q-max", spec.q_max, "var");
    sw->add_option("--nq", spec.nq, "Q grid points")->check(CLI::PositiveNumber);
    add_overrides(sw, o);

    double p_target = 1440.0, dt = 1e-6;
    bool waveform = false;
    auto* td = app.add_subcommand("validate-td", "compare loss-model predictions with a switched time-domain run");
    td->add_option("--scenario", params, "inverter parameter JSON")->check(CLI::ExistingFile);
    td->add_option("--out", out, "output directory");
    td->add_option("--p-out", p_target, "target output power, W");
    td->add_option("--dt", dt, "integration step, s");
    td->add_flag("--waveform", waveform, "also write the sampled waveform");

    auto* mpp = app.add_subcommand("mpp", "maximum power point of every PV unit in a scenario");
    mpp->add_option("--scenario", scenario, "scenario JSON (defaults to the LG400 module)")->check(CLI::ExistingFile);
    mpp->add_option("--out", out, "output directory");

    std::string model = "both";
    auto* dp = app.add_subcommand("dispatch", "day-ahead battery dispatch");
    dp->add_option("--scenario", scenario, "dispatch JSON (defaults to the synthetic day)")->check(CLI::ExistingFile);
    dp->add_option("--out", out, "output directory");
    dp->add_option("--model", model, "tsbi, ce_cs, both or scenario")
        ->check(CLI::IsMember({"tsbi", "ce_cs", "both", "scenario"}));
    add_overrides(dp, o);

    int samples = 100;
    auto* jc = app.add_subcommand("check-jacobian", "analytic vs finite-difference Jacobian at random states");
    jc->add_option("--scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    jc->add_option("--out", out, "output directory");
    jc->add_option("--samples", samples, "number of states")->check(CLI::PositiveNumber);
    add_overrides(jc, o);

    auto* fx = app.add_subcommand("fixtures", "write the bundled example inputs");
    fx->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : shell::kInputError;
    }

    if (*pf) return shell::cmd_pf(scenario, out, o);
    if (*sw) return shell::cmd_sweep_eff(params, out, spec, o);
    if (*td) return shell::cmd_validate_td(params, out, p_target, dt, waveform);
    if (*mpp) return shell::cmd_mpp(scenario, out);
    if (*dp) return shell::cmd_dispatch(scenario, out, model, o);
    if (*jc) return shell::cmd_check_jacobian(scenario, out, samples, o);
    if (*fx) return write_fixtures(out);
    return shell::kInputError;
}
