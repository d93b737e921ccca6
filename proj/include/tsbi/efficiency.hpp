#pragma once

#include <functional>
#include <vector>

#include "tsbi/solver.hpp"

namespace tsbi::solve {

/// Converged single-inverter operating point behind a 1 p.u. stiff source.
struct OperatingPoint {
    double p_set = 0.0;  // W at T2
    double q_set = 0.0;  // var at T2
    bool converged = false;
    int iterations = 0;
    InverterResult result;

    double efficiency() const { return result.efficiency(); }
};

/// Lossless DC source of voltage v (a battery with r_int = 0).
der::BatteryDer ideal_dc_source(double v);

/// Solves one inverter at constant (p, q). Tries the consistent initial state
/// first and falls back to a flat start.
OperatingPoint evaluate_operating_point(const inverter::TsbiParams& params, const der::DerDevice& der, double p,
                                        double q, const SolverOptions& opts = {});

/// n evenly spaced values on [a, b] (n >= 1; a single point returns a).
std::vector<double> linspace(double a, double b, int n);

/// Every (p, q) pair, p-major (index = i_p * q.size() + i_q). Points are
/// independent and spread over `threads` workers; output order is fixed.
std::vector<OperatingPoint> sweep_efficiency(const inverter::TsbiParams& params, const der::DerDevice& der,
                                             const std::vector<double>& p_values,
                                             const std::vector<double>& q_values, const SolverOptions& opts = {},
                                             int threads = 1);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace tsbi::solve
