#pragma once

// Double-stabilized second-order Crank-Nicolson stepping for the nonlocal
// Cahn-Hilliard flow
//
//   d phi / dt = Lap( phi^3 - phi + eps^2 * L phi ),
//
// discretized per Fourier mode as a linear two-step recurrence:
//
//   (phi^{n+1}-phi^n)/dt = Lap_N( 3/2 (phi^n)^3 - 1/2 (phi^{n-1})^3
//        - (3/2 phi^n - 1/2 phi^{n-1})
//        + A0 (phi^{n+1} - 2 phi^n + phi^{n-1})
//        + A1 dt (phi^{n+1} - phi^n)
//        + eps^2 L_N (3/4 phi^{n+1} + 1/4 phi^{n-1}) ).
//
// The cubic term is evaluated by collocation (pointwise cube, then FFT),
// no dealiasing unless requested. The implicit part is diagonal in Fourier
// space; each step is one pointwise solve, never an iteration. A1 = 0
// recovers the single-stabilization variant. Zero modes are copied verbatim,
// so the discrete mass is conserved bit-for-bit.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nch/energy.hpp"
#include "nch/grid.hpp"
#include "nch/kernel.hpp"

namespace nch {

enum class InitMethod {
    FirstOrderStabilized, // semi-implicit with explicit cubic
    Rk2,                  // explicit Heun step
};

struct SchemeParams {
    double epsilon = 0.0;
    double A0 = 2.0;
    double A1 = 5.0;
    double dt = 0.0;
    bool dealias = false;             // 2/3-truncation of the cubic term
    InitMethod init_method = InitMethod::FirstOrderStabilized;
    double init_A = 2.0;              // stabilization constant of the first step
    bool cubic_term = true;           // testing hook: false drops the cubic
};

// Two-step history of a simulation in progress.
struct StepperState {
    RealField phi_prev; // phi^{n-1}
    RealField phi_curr; // phi^n
    double t = 0.0;
    long long n = 0;
};

class Stepper {
public:
    // Requires gamma0(kernel, epsilon) > 0; the kernel must outlive the
    // stepper. The per-mode denominator table is precomputed here.
    Stepper(const SchemeParams& params, GridPtr grid, const Kernel& kernel);

    const SchemeParams& params() const { return params_; }
    const Grid& grid() const { return *grid_; }
    const Kernel& kernel() const { return *kernel_; }

    double denom_at_bin(int a, int b) const { return denom_[grid_->idx(a, b)]; }
    double denom_at_mode(int k, int l) const {
        return denom_[grid_->idx(grid_->bin_of_mode(k, grid_->n1()),
                                 grid_->bin_of_mode(l, grid_->n2()))];
    }
    const std::vector<double>& denom() const { return denom_; }

    // One step phi^{n+1} from (phi^{n-1}, phi^n). Throws DivergenceError on
    // blow-up (non-finite values or sup-norm beyond 1e6).
    RealField step(const StepperState& state) const;

    // l2 norm of the scheme equation's defect for a (prev, curr, next)
    // triple, assembled through the public physical-space operators rather
    // than the precomputed solve.
    double residual(const RealField& phi_prev, const RealField& phi_curr,
                    const RealField& phi_next) const;

private:
    SchemeParams params_;
    GridPtr grid_;
    const Kernel* kernel_;
    std::vector<double> denom_;
    std::vector<unsigned char> dealias_keep_; // empty unless dealias is on
};

// First step phi^1 from phi^0 via the stabilized semi-implicit scheme with
// explicit cubic and stabilization constant params.init_A.
RealField first_order_step(const SchemeParams& params, GridPtr grid,
                           const Kernel& kernel, const RealField& phi0);

// First step via explicit Heun (second-order Runge-Kutta); conditionally
// stable, so dt must be small.
RealField rk2_step(const SchemeParams& params, GridPtr grid,
                   const Kernel& kernel, const RealField& phi0);

// Piecewise-constant step-size schedule; segments cover (previous t_end,
// t_end] and t_end must be strictly increasing.
struct ScheduleSegment {
    double t_end = 0.0;
    double dt = 0.0;
};

struct Schedule {
    std::vector<ScheduleSegment> segments;
    void validate() const;
};

struct RunObservers {
    // Record an EnergyRecord every this many steps (0 disables periodic
    // records; the initial and final states are always recorded when > 0).
    int energy_every = 0;
    // When set, records with a full two-step history also carry the
    // increment-corrected energy computed with this M0.
    std::optional<double> m0;
    // Snapshot requests: each time fires once, at the first state whose time
    // has reached it.
    std::vector<double> snapshot_times;
    std::function<void(const RealField& phi, double t)> on_snapshot;
    // Called after every accepted step (including initializer steps).
    std::function<void(const StepperState& state, double dt)> on_step;
    // Called for every emitted record; survives a mid-run divergence.
    std::function<void(const EnergyRecord&)> on_record;
};

struct RunResult {
    StepperState state;
    std::vector<EnergyRecord> records;
};

// Integrate from phi0 at t = 0 through the schedule. Each segment starts
// with one initializer step (the two-step history is not valid across a
// step-size change), then proceeds with the two-step scheme. Observer
// callbacks fire as configured; divergence propagates as DivergenceError
// carrying the last valid time.
RunResult run_schedule(const SchemeParams& params, GridPtr grid,
                       const Kernel& kernel, const Schedule& schedule,
                       const RealField& phi0, const RunObservers& observers = {});

} // namespace nch
