#include "tsbi/control.hpp"

#include <cmath>

#include "tsbi/errors.hpp"

namespace tsbi::ctrl {

VoltVar VoltVar::default_curve(double s_rated) {
    VoltVar vv;
    vv.q_max = 0.25 * s_rated;
    vv.q_min = -0.25 * s_rated;
    return vv;
}

void ControlSpec::validate() const {
    if (const auto* pf = std::get_if<ConstantPF>(&q_law)) {
        if (!(pf->pf > 0.0 && pf->pf <= 1.0)) throw InputError("constant PF requires 0 < pf <= 1");
    }
    if (const auto* vv = std::get_if<VoltVar>(&q_law)) {
        if (!(vv->v1 < vv->v2 && vv->v2 <= vv->v3 && vv->v3 < vv->v4))
            throw InputError("volt-var breakpoints must satisfy v1 < v2 <= v3 < v4");
        if (!(vv->q_max >= 0.0 && vv->q_min <= 0.0)) throw InputError("volt-var needs q_max >= 0 >= q_min");
        if (!(vv->eps_vv > 0.0)) throw InputError("volt-var eps_vv must be positive");
    }
}

void ControlSpec::validate_for(const der::DerDevice& der) const {
    validate();
    if (std::holds_alternative<Mppt>(p_law) && !std::holds_alternative<der::PvDer>(der))
        throw InputError("MPPT control requires a PV source");
}

double voltvar_piecewise(const VoltVar& vv, double v) {
    if (v <= vv.v1) return vv.q_max;
    if (v < vv.v2) return vv.q_max * (vv.v2 - v) / (vv.v2 - vv.v1);
    if (v <= vv.v3) return 0.0;
    if (v < vv.v4) return vv.q_min * (v - vv.v3) / (vv.v4 - vv.v3);
    return vv.q_min;
}

double voltvar_error_bound(const VoltVar& vv) {
    return (vv.q_max / (vv.v2 - vv.v1) + std::abs(vv.q_min) / (vv.v4 - vv.v3)) * std::sqrt(vv.eps_vv);
}

ApparentPowerCheck apparent_power_check(double p_ctrl, double q_ctrl, double s_rated) {
    ApparentPowerCheck c;
    c.s_mag = std::hypot(p_ctrl, q_ctrl);
    c.ok = c.s_mag <= s_rated;
    return c;
}

}  // namespace tsbi::ctrl
