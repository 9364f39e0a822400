#pragma once

// Experiment harnesses: temporal self-convergence against a fine-step
// benchmark, coarsening runs driven by a step-size schedule, seeded random
// initial data, and the log-log power-law fit of the energy decay.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nch/config.hpp"
#include "nch/energy.hpp"
#include "nch/grid.hpp"
#include "nch/kernel.hpp"
#include "nch/stepper.hpp"

namespace nch {

// amplitude*sin(pi x/X1)*sin(pi y/X2) + offset, the constant offset, or
// i.i.d. uniform values in [-amplitude, amplitude).
RealField make_initial(GridPtr grid, const InitialCondition& ic);
RealField random_initial(GridPtr grid, double amplitude, std::uint64_t seed);

struct ConvergenceRow {
    double dt = 0.0;
    double l2_error = 0.0;
    std::optional<double> observed_rate; // log2(e_k / e_{k+1})
    bool diverged = false;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double dt_ref = 0.0;
    double mean_rate = 0.0;  // mean of pairwise rates
    double ls_slope = 0.0;   // least-squares slope of ln(error) vs ln(dt)
    bool benchmark_diverged = false;
};

// Ladder runs and the benchmark share the grid and kernel and may execute
// in parallel; the result table is assembled deterministically by index.
ConvergenceResult convergence_study(const ConvergenceConfig& cfg);

struct CoarseningResult {
    std::vector<EnergyRecord> records;
    StepperState final_state;
    bool diverged = false;
    double t_reached = 0.0;
    std::string divergence_message;
};

// Full schedule-driven run from the configured initial data. Energy records
// follow cfg.output.energy_every_steps; snapshots fire through the callback.
// On divergence the records produced so far are preserved and flagged.
CoarseningResult coarsening_run(
    const RunConfig& cfg,
    const std::function<void(const RealField&, double)>& on_snapshot = {});

struct PowerLawFit {
    double m_e = 0.0;        // exponent
    double b_e = 0.0;        // prefactor
    double t_min = 0.0, t_max = 0.0;
    double residual_rms = 0.0;
    int n_points = 0;
};

// Least-squares line on (ln t, ln E) over records with t in [t_min, t_max].
// Requires at least 8 samples in the window and positive energies there.
PowerLawFit fit_power_law(const std::vector<EnergyRecord>& series, double t_min,
                          double t_max);

// Worker-thread count: explicit > 0 wins, then the NCH_THREADS environment
// variable, then hardware concurrency.
int resolve_thread_count(int requested);

} // namespace nch
