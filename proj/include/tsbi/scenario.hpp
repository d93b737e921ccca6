#pragma once

#include <string>
#include <vector>

#include "tsbi/dispatch.hpp"
#include "tsbi/netmodel.hpp"
#include "tsbi/solver.hpp"

namespace tsbi::shell {

/// Everything a power-flow run needs, as read from one JSON document.
struct ScenarioFile {
    net::PerUnitBase base;
    std::vector<net::NodeSpec> nodes;
    std::vector<net::BranchSpec> branches;
    std::vector<net::LoadSpec> loads;
    std::vector<solve::InverterSpec> inverters;
    solve::SolverOptions solver;

    net::NetworkModel network() const;
    bool operator==(const ScenarioFile&) const = default;
};

/// Strict parse: unknown fields, wrong types and dangling ids raise InputError
/// naming the JSON path. Inverter parameters start from the default preset
/// set; "switch", "diode" and "preset" keys select named presets, explicit
/// fields override them.
ScenarioFile parse_scenario(const std::string& text);

/// Canonical form with every field explicit; parse_scenario inverts it exactly.
std::string serialize_scenario(const ScenarioFile& s);

inverter::TsbiParams parse_params(const std::string& text);
std::string serialize_params(const inverter::TsbiParams& p);

dispatch::DispatchScenario parse_dispatch(const std::string& text);
std::string serialize_dispatch(const dispatch::DispatchScenario& s);

/// Reads a whole file; IoError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace tsbi::shell
