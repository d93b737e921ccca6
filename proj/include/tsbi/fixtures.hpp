#pragma once

#include <complex>
#include <cstdint>

#include "tsbi/scenario.hpp"

namespace tsbi::shell {

/// Balanced three-phase line block from self and mutual series impedance (p.u.).
net::BranchSpec line(const std::string& from, const std::string& to, std::complex<double> z_self,
                     std::complex<double> z_mutual);

/// Series string of LG400-class modules.
der::PvParams pv_string(int modules);

/// Slack plus three load nodes in a chain; a battery at the far end of phase a
/// exporting heavily, a PV string on phase b and a second battery on phase c.
ScenarioFile feeder4(const ctrl::QLaw& q_law = ctrl::ConstantQ{});

/// Slack plus nine three-phase nodes on two laterals, five Volt-VAR inverters.
ScenarioFile voltvar10();

/// Radial three-phase feeder of `nodes` nodes (trunk with laterals) and
/// `inverters` battery/PV inverters spread over the far nodes. Loads are drawn
/// from a fixed-seed generator, so the fixture is reproducible.
ScenarioFile synthetic_feeder(int nodes = 1000, int inverters = 100, const ctrl::QLaw& q_law = ctrl::ConstantQ{},
                              std::uint64_t seed = 7);

/// Distance of |v| (p.u.) from the Volt-VAR dead band [v2, v3].
double dead_band_distance(double v_mag, const ctrl::VoltVar& vv = {});

}  // namespace tsbi::shell
