#include "tsbi/efficiency.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "tsbi/errors.hpp"

namespace tsbi::solve {

der::BatteryDer ideal_dc_source(double v) {
    der::BatteryDer b;
    b.params.v_oc_nom = v;
    b.params.r_int = 0.0;
    b.params.i_max = 1e6;
    return b;
}

OperatingPoint evaluate_operating_point(const inverter::TsbiParams& params, const der::DerDevice& der, double p,
                                        double q, const SolverOptions& opts) {
    InverterSpec spec;
    spec.id = "inv";
    spec.der = der;
    spec.params = params;
    spec.control.p_law = ctrl::ConstantP{p};
    spec.control.q_law = ctrl::ConstantQ{q};
    const auto sys = single_inverter_system(spec);

    OperatingPoint op;
    op.p_set = p;
    op.q_set = q;
    SolverOptions o = opts;
    o.flat_start = true;
    SolveReport rep;
    for (auto mode : {InitMode::Consistent, InitMode::Flat}) {
        o.init = mode;
        try {
            rep = solve_power_flow(sys, o);
        } catch (const NumericalError&) {
            continue;
        }
        if (rep.converged) break;
    }
    op.converged = rep.converged;
    op.iterations = rep.iterations;
    if (rep.converged) op.result = rep.inverters.front();
    return op;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw InputError("linspace needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return v;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; !failed && (i = next++) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    // first failure wins; the others stop picking up work
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<OperatingPoint> sweep_efficiency(const inverter::TsbiParams& params, const der::DerDevice& der,
                                             const std::vector<double>& p_values,
                                             const std::vector<double>& q_values, const SolverOptions& opts,
                                             int threads) {
    if (p_values.empty() || q_values.empty()) throw InputError("efficiency sweep: empty range");
    auto within = [&](double x) { return std::isfinite(x) && std::abs(x) <= params.s_rated * (1.0 + 1e-12); };
    for (double p : p_values)
        if (!within(p)) throw InputError("efficiency sweep: p outside +-s_rated");
    for (double q : q_values)
        if (!within(q)) throw InputError("efficiency sweep: q outside +-s_rated");
    std::vector<OperatingPoint> out(p_values.size() * q_values.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = evaluate_operating_point(params, der, p_values[i / q_values.size()], q_values[i % q_values.size()],
                                          opts);
    });
    return out;
}

}  // namespace tsbi::solve
