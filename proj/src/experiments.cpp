#include "nch/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "nch/rng.hpp"

namespace nch {

RealField make_initial(GridPtr grid, const InitialCondition& ic) {
    switch (ic.kind) {
    case InitKind::SineBump: {
        RealField f(grid);
        const Grid& g = *grid;
        for (int i = 0; i < g.n1(); ++i) {
            const double sx = std::sin(std::numbers::pi * g.node_x(i) / g.x1());
            for (int j = 0; j < g.n2(); ++j)
                f(i, j) = ic.amplitude * sx *
                              std::sin(std::numbers::pi * g.node_y(j) / g.x2()) +
                          ic.offset;
        }
        return f;
    }
    case InitKind::Constant: {
        return RealField(grid, ic.offset);
    }
    case InitKind::Random:
        return random_initial(std::move(grid), ic.amplitude, ic.seed);
    }
    throw ConfigError("make_initial: unknown initial-condition kind");
}

RealField random_initial(GridPtr grid, double amplitude, std::uint64_t seed) {
    if (!(amplitude > 0.0))
        throw ConfigError("random_initial: amplitude must be positive");
    RealField f(std::move(grid));
    Xorshift64Star rng(seed);
    for (double& v : f.values())
        v = rng.next_symmetric(amplitude);
    return f;
}

int resolve_thread_count(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("NCH_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

SchemeParams scheme_from(const ConvergenceConfig& cfg, double dt) {
    SchemeParams p;
    p.epsilon = cfg.epsilon;
    p.A0 = cfg.A0;
    p.A1 = cfg.A1;
    p.dt = dt;
    p.dealias = cfg.dealias;
    p.init_method = cfg.init_method;
    p.init_A = cfg.init_A;
    return p;
}

} // namespace

CoarseningResult coarsening_run(
    const RunConfig& cfg,
    const std::function<void(const RealField&, double)>& on_snapshot) {
    cfg.schedule.validate();
    GridPtr grid = make_grid(cfg.domain.X1, cfg.domain.X2, cfg.grid.N1, cfg.grid.N2);
    const Kernel kernel = build_kernel(grid, cfg.model.delta,
                                       cfg.model.kernel_image_range);
    const RealField phi0 = make_initial(grid, cfg.initial);

    CoarseningResult out;
    RunObservers obs;
    obs.energy_every = cfg.output.energy_every_steps;
    obs.m0 = cfg.m0;
    obs.snapshot_times = cfg.output.snapshot_times;
    obs.on_snapshot = on_snapshot;
    obs.on_record = [&out](const EnergyRecord& r) { out.records.push_back(r); };

    const SchemeParams params = cfg.scheme_params(cfg.schedule.segments.front().dt);
    try {
        RunResult r = run_schedule(params, grid, kernel, cfg.schedule, phi0, obs);
        out.final_state = std::move(r.state);
        out.t_reached = out.final_state.t;
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.t_reached = e.t;
        out.divergence_message = e.what();
    }
    return out;
}

ConvergenceResult convergence_study(const ConvergenceConfig& cfg) {
    if (cfg.k_max < 0)
        throw ConfigError("convergence_study: k_max must be >= 0");
    if (!(cfg.dt_base > 0.0) || !(cfg.t_final > 0.0))
        throw ConfigError("convergence_study: dt_base and t_final must be positive");

    GridPtr grid = make_grid(cfg.X1, cfg.X2, cfg.N1, cfg.N2);
    const Kernel kernel = build_kernel(grid, cfg.delta, cfg.kernel_image_range);
    if (!(gamma0(kernel, cfg.epsilon) > 0.0))
        throw ConfigError("convergence_study: gamma0 must be positive for the "
                          "chosen epsilon and delta");

    const RealField phi0 = make_initial(grid, cfg.initial);

    std::vector<double> dts(cfg.k_max + 1);
    for (int k = 0; k <= cfg.k_max; ++k)
        dts[k] = cfg.dt_base * std::pow(2.0, -k);
    const double dt_ref = cfg.dt_ref > 0.0 ? cfg.dt_ref : dts.back() / 8.0;

    // Job list: ladder runs plus the benchmark at the end.
    std::vector<double> job_dt = dts;
    job_dt.push_back(dt_ref);
    std::vector<RealField> finals(job_dt.size());
    std::vector<char> failed(job_dt.size(), 0);

    auto run_one = [&](std::size_t j) {
        Schedule sched{{{cfg.t_final, job_dt[j]}}};
        try {
            RunResult r = run_schedule(scheme_from(cfg, job_dt[j]), grid, kernel,
                                       sched, phi0);
            finals[j] = std::move(r.state.phi_curr);
        } catch (const DivergenceError&) {
            failed[j] = 1;
        }
    };

    const int threads = std::min<int>(resolve_thread_count(cfg.threads),
                                      static_cast<int>(job_dt.size()));
    if (threads <= 1) {
        for (std::size_t j = 0; j < job_dt.size(); ++j)
            run_one(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < job_dt.size();
                     j = next.fetch_add(1))
                    run_one(j);
            });
        for (std::thread& th : pool)
            th.join();
    }

    ConvergenceResult out;
    out.dt_ref = dt_ref;
    out.benchmark_diverged = failed.back() != 0;

    for (int k = 0; k <= cfg.k_max; ++k) {
        ConvergenceRow row;
        row.dt = dts[k];
        row.diverged = failed[k] != 0 || out.benchmark_diverged;
        if (!row.diverged) {
            RealField diff = finals[k];
            const RealField& ref = finals.back();
            for (std::size_t m = 0; m < diff.size(); ++m)
                diff.values()[m] -= ref.values()[m];
            row.l2_error = norm(diff, 2.0);
        }
        out.rows.push_back(row);
    }
    for (std::size_t k = 0; k + 1 < out.rows.size(); ++k) {
        if (out.rows[k].diverged || out.rows[k + 1].diverged)
            continue;
        if (out.rows[k + 1].l2_error > 0.0)
            out.rows[k].observed_rate =
                std::log2(out.rows[k].l2_error / out.rows[k + 1].l2_error);
    }

    double rate_sum = 0.0;
    int rate_n = 0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int ls_n = 0;
    for (const ConvergenceRow& row : out.rows) {
        if (row.observed_rate) {
            rate_sum += *row.observed_rate;
            ++rate_n;
        }
        if (!row.diverged && row.l2_error > 0.0) {
            const double x = std::log(row.dt);
            const double y = std::log(row.l2_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++ls_n;
        }
    }
    out.mean_rate = rate_n > 0 ? rate_sum / rate_n : 0.0;
    out.ls_slope = ls_n > 1 ? (ls_n * sxy - sx * sy) / (ls_n * sxx - sx * sx) : 0.0;
    return out;
}

PowerLawFit fit_power_law(const std::vector<EnergyRecord>& series, double t_min,
                          double t_max) {
    if (!(t_min > 0.0) || !(t_max > t_min))
        throw ConfigError("fit_power_law: need 0 < t_min < t_max");

    std::vector<double> xs, ys;
    for (const EnergyRecord& r : series) {
        if (r.t < t_min || r.t > t_max)
            continue;
        if (!(r.E > 0.0))
            throw DomainError("fit_power_law: nonpositive energy at t = " +
                              std::to_string(r.t));
        xs.push_back(std::log(r.t));
        ys.push_back(std::log(r.E));
    }
    if (xs.size() < 8)
        throw ConfigError("fit_power_law: only " + std::to_string(xs.size()) +
                          " samples in [" + std::to_string(t_min) + ", " +
                          std::to_string(t_max) + "]; need at least 8");

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        rss += r * r;
    }

    PowerLawFit fit;
    fit.m_e = slope;
    fit.b_e = std::exp(intercept);
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.residual_rms = std::sqrt(rss / n);
    fit.n_points = static_cast<int>(xs.size());
    return fit;
}

} // namespace nch
