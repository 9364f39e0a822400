#include "nch/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nch {

double energy(const RealField& phi, const Kernel& k, double epsilon) {
    require_compatible(phi.grid(), k.grid(), "energy");
    double well = 0.0;
    for (double v : phi.values()) {
        const double w = v * v - 1.0;
        well += 0.25 * w * w;
    }
    const RealField lphi = nonlocal_apply(k, phi);
    double nl = 0.0;
    for (std::size_t m = 0; m < phi.size(); ++m)
        nl += phi.values()[m] * lphi.values()[m];
    return phi.grid().cell_area() * (well + 0.5 * epsilon * epsilon * nl);
}

double mass(const RealField& phi) {
    double s = 0.0;
    for (double v : phi.values())
        s += v;
    return phi.grid().cell_area() * s;
}

double modified_energy(const RealField& phi_next, const RealField& phi_curr,
                       const RealField& phi_prev, const Kernel& k,
                       const EnergyParams& ep, double dt) {
    require_compatible(phi_next.grid(), phi_curr.grid(), "modified_energy");
    require_compatible(phi_next.grid(), phi_prev.grid(), "modified_energy");
    require_compatible(phi_next.grid(), k.grid(), "modified_energy");
    if (!(dt > 0.0))
        throw ConfigError("modified_energy: dt must be positive");

    double diff2 = 0.0;   // sum d^2
    double quad = 0.0;    // sum (m^2 + m e + e^2) d^2
    for (std::size_t i = 0; i < phi_next.size(); ++i) {
        const double np = phi_next.values()[i];
        const double cp = phi_curr.values()[i];
        const double pp = phi_prev.values()[i];
        const double d = np - cp;
        const double m = 0.5 * (np + cp);
        const double e = 1.5 * cp - 0.5 * pp;
        diff2 += d * d;
        quad += (m * m + m * e + e * e) * d * d;
    }
    const double ca = phi_next.grid().cell_area();
    const double inc = ca * diff2;

    const double c_rate = (27.0 / 8.0) * ep.M0 * ep.M0 * dt;
    const double c_stab = 0.5 * ep.A0 + 0.25 +
                          0.125 * ep.epsilon * ep.epsilon * k.j_star_one();
    return energy(phi_next, k, ep.epsilon) + (c_rate + c_stab) * inc -
           0.25 * ca * quad;
}

double estimate_m0(const std::vector<RealField>& history, double dt) {
    if (history.size() < 2)
        throw ConfigError("estimate_m0: need at least two fields");
    if (!(dt > 0.0))
        throw ConfigError("estimate_m0: dt must be positive");

    const double inf = std::numeric_limits<double>::infinity();
    double best = 0.0;
    for (std::size_t n = 1; n < history.size(); ++n) {
        require_compatible(history[n].grid(), history[n - 1].grid(), "estimate_m0");
        double rate = 0.0;
        for (std::size_t i = 0; i < history[n].size(); ++i)
            rate = std::max(rate, std::abs(history[n].values()[i] -
                                           history[n - 1].values()[i]));
        best = std::max(best, norm(history[n], inf) + rate / dt);
    }
    return 1.0 + best;
}

std::vector<std::string> stabilization_warnings(double A0, double A1, double m0) {
    std::vector<std::string> w;
    const double m2 = m0 * m0;
    if (A0 < 1.5 * m2)
        w.push_back("A0 = " + std::to_string(A0) + " is below the dissipation threshold " +
                    std::to_string(1.5 * m2) + " for M0 = " + std::to_string(m0));
    if (A1 < 4.75 * m2)
        w.push_back("A1 = " + std::to_string(A1) + " is below the dissipation threshold " +
                    std::to_string(4.75 * m2) + " for M0 = " + std::to_string(m0));
    return w;
}

} // namespace nch
