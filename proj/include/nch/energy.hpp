#pragma once

// Discrete free energy, mass, and the increment-corrected energy whose
// monotone decay the double-stabilized stepper guarantees. All quantities
// use the grid inner product <f,g> = h1*h2*sum f g.

#include <optional>
#include <vector>

#include "nch/grid.hpp"
#include "nch/kernel.hpp"

namespace nch {

// One diagnostics row of a simulation time series.
struct EnergyRecord {
    double t = 0.0;
    double mass = 0.0;                 // <phi, 1>
    double E = 0.0;                    // discrete free energy
    std::optional<double> E_mod;       // increment-corrected energy, when available
    double linf = 0.0;
    double min = 0.0;
    double max = 0.0;
    double dt = 0.0;                   // step size in force
};

struct EnergyParams {
    double epsilon = 0.0;
    double M0 = 1.0;     // sup-norm surrogate entering the increment correction
    double A0 = 2.0;
    double A1 = 5.0;
};

// E = <F(phi), 1> + (eps^2/2) <phi, L phi>, F(phi) = (phi^2 - 1)^2 / 4.
double energy(const RealField& phi, const Kernel& k, double epsilon);

// <phi, 1>.
double mass(const RealField& phi);

// Corrected energy of three consecutive states (newest first):
//   E(next) + (27/8) M0^2 dt ||d||^2 + (A0/2 + 1/4 + eps^2 (J*1)/8) ||d||^2
//          - (1/4) < m^2 + m*e + e^2, d^2 >,
// with d = next - curr, m = (next + curr)/2, e = (3 curr - prev)/2.
double modified_energy(const RealField& phi_next, const RealField& phi_curr,
                       const RealField& phi_prev, const Kernel& k,
                       const EnergyParams& ep, double dt);

// Sup-norm surrogate from a sampled trajectory with spacing dt:
// 1 + max_k (||phi_k||_inf + ||(phi_k - phi_{k-1})/dt||_inf).
double estimate_m0(const std::vector<RealField>& history, double dt);

// Warnings when the stabilization constants fall below the thresholds
// 3 M0^2 / 2 (A0) and 19 M0^2 / 4 (A1) tied to a given M0.
std::vector<std::string> stabilization_warnings(double A0, double A1, double m0);

} // namespace nch
