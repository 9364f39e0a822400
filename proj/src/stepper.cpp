#include "nch/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nch {

namespace {

using cvec = std::vector<std::complex<double>>;

constexpr double kBlowupLinf = 1e6;

cvec forward_raw(const Grid& g, const std::vector<double>& values) {
    cvec in(g.size()), out(g.size());
    std::copy(values.begin(), values.end(), in.begin());
    g.fft_raw(in.data(), out.data());
    return out;
}

// Backward transform with 1/(N1 N2) scaling; real parts only.
void inverse_raw(const Grid& g, const cvec& hat, std::vector<double>& values) {
    cvec out(g.size());
    g.ifft_raw(hat.data(), out.data());
    const double scale = 1.0 / static_cast<double>(g.size());
    values.resize(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        values[m] = out[m].real() * scale;
}

std::vector<double> cubed(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t m = 0; m < v.size(); ++m)
        out[m] = v[m] * v[m] * v[m];
    return out;
}

void check_finite(const Grid&, const std::vector<double>& values, double t) {
    double linf = 0.0;
    for (double v : values) {
        if (!std::isfinite(v))
            throw DivergenceError("solution lost finiteness at t = " + std::to_string(t),
                                  t, std::numeric_limits<double>::infinity());
        linf = std::max(linf, std::abs(v));
    }
    if (linf > kBlowupLinf)
        throw DivergenceError("solution blew up at t = " + std::to_string(t) +
                              " (||phi||_inf = " + std::to_string(linf) + ")",
                              t, linf);
}

// Keep-mask of the 2/3 truncation rule used when dealiasing is requested.
std::vector<unsigned char> make_dealias_mask(const Grid& g) {
    std::vector<unsigned char> keep(g.size(), 1);
    const int kcut1 = g.n1() / 3;
    const int kcut2 = g.n2() / 3;
    for (int a = 0; a < g.n1(); ++a) {
        const int k = g.mode_of_bin(a, g.n1());
        for (int b = 0; b < g.n2(); ++b) {
            const int l = g.mode_of_bin(b, g.n2());
            if (std::abs(k) > kcut1 || std::abs(l) > kcut2)
                keep[g.idx(a, b)] = 0;
        }
    }
    return keep;
}

void apply_mask(const std::vector<unsigned char>& keep, cvec& hat) {
    if (keep.empty())
        return;
    for (std::size_t m = 0; m < hat.size(); ++m)
        if (!keep[m])
            hat[m] = 0.0;
}

// Per-mode solve shared by the stateless step and the run loop.
void spectral_cn2(const Stepper& s, const cvec& hat_prev, const cvec& hat_curr,
                  const cvec& nl, cvec& hat_next) {
    const Grid& g = s.grid();
    const SchemeParams& p = s.params();
    const double eps2 = p.epsilon * p.epsilon;
    const double a1dt = p.A1 * p.dt;
    hat_next.resize(g.size());
    hat_next[0] = hat_curr[0]; // exact mass conservation
    for (std::size_t m = 1; m < g.size(); ++m) {
        const double lam = g.lambda()[m];
        const double sig = s.kernel().sigma()[m];
        const std::complex<double> breve = 1.5 * hat_curr[m] - 0.5 * hat_prev[m];
        const std::complex<double> bracket =
            nl[m] - breve - p.A0 * (2.0 * hat_curr[m] - hat_prev[m]) -
            a1dt * hat_curr[m] + 0.25 * eps2 * sig * hat_prev[m];
        hat_next[m] = (hat_curr[m] / p.dt - lam * bracket) / s.denom()[m];
    }
}

} // namespace

Stepper::Stepper(const SchemeParams& params, GridPtr grid, const Kernel& kernel)
    : params_(params), grid_(std::move(grid)), kernel_(&kernel) {
    if (!(params_.dt > 0.0))
        throw ConfigError("stepper: dt must be positive");
    if (!(params_.epsilon > 0.0))
        throw ConfigError("stepper: epsilon must be positive");
    if (params_.A0 < 0.0 || params_.A1 < 0.0)
        throw ConfigError("stepper: stabilization constants must be nonnegative");
    require_compatible(*grid_, kernel_->grid(), "stepper");

    const double g0 = gamma0(*kernel_, params_.epsilon);
    if (!(g0 > 0.0))
        throw ConfigError("stepper: gamma0 = eps^2*(J*1) - 1 = " + std::to_string(g0) +
                          " must be positive; reduce the kernel width or increase epsilon");

    const double eps2 = params_.epsilon * params_.epsilon;
    denom_.resize(grid_->size());
    for (std::size_t m = 0; m < grid_->size(); ++m) {
        const double lam = grid_->lambda()[m];
        const double sig = kernel_->sigma()[m];
        denom_[m] = 1.0 / params_.dt +
                    lam * (params_.A0 + params_.A1 * params_.dt) +
                    0.75 * eps2 * lam * sig;
    }
    if (params_.dealias)
        dealias_keep_ = make_dealias_mask(*grid_);
}

RealField Stepper::step(const StepperState& state) const {
    require_compatible(*grid_, state.phi_curr.grid(), "step");
    require_compatible(*grid_, state.phi_prev.grid(), "step");

    const double m_prev = mean(state.phi_prev);
    const double m_curr = mean(state.phi_curr);
    const double scale = std::max(1.0, norm(state.phi_curr,
                                            std::numeric_limits<double>::infinity()));
    if (std::abs(m_prev - m_curr) > 1e-12 * scale)
        throw DomainError("step: two-step history carries unequal means (" +
                          std::to_string(m_prev) + " vs " + std::to_string(m_curr) + ")");

    const Grid& g = *grid_;
    cvec hat_prev = forward_raw(g, state.phi_prev.values());
    cvec hat_curr = forward_raw(g, state.phi_curr.values());

    cvec nl(g.size(), 0.0);
    if (params_.cubic_term) {
        cvec cube_prev = forward_raw(g, cubed(state.phi_prev.values()));
        cvec cube_curr = forward_raw(g, cubed(state.phi_curr.values()));
        apply_mask(dealias_keep_, cube_prev);
        apply_mask(dealias_keep_, cube_curr);
        for (std::size_t m = 0; m < g.size(); ++m)
            nl[m] = 1.5 * cube_curr[m] - 0.5 * cube_prev[m];
        for (const std::complex<double>& v : nl)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw DivergenceError(
                    "nonlinear term lost finiteness at t = " + std::to_string(state.t),
                    state.t, norm(state.phi_curr, std::numeric_limits<double>::infinity()));
    }

    cvec hat_next(g.size());
    spectral_cn2(*this, hat_prev, hat_curr, nl, hat_next);

    RealField out(state.phi_curr.grid_ptr());
    inverse_raw(g, hat_next, out.values());
    check_finite(g, out.values(), state.t + params_.dt);
    return out;
}

namespace {

// Cubic collocation term with the stepper's dealias policy, materialized in
// physical space (residual path).
RealField filtered_cube(const RealField& f, const std::vector<unsigned char>& keep) {
    const Grid& g = f.grid();
    std::vector<double> c = cubed(f.values());
    if (keep.empty()) {
        RealField out(f.grid_ptr());
        out.values() = std::move(c);
        return out;
    }
    cvec hat = forward_raw(g, c);
    apply_mask(keep, hat);
    RealField out(f.grid_ptr());
    inverse_raw(g, hat, out.values());
    return out;
}

} // namespace

double Stepper::residual(const RealField& phi_prev, const RealField& phi_curr,
                         const RealField& phi_next) const {
    require_compatible(*grid_, phi_prev.grid(), "residual");
    require_compatible(*grid_, phi_curr.grid(), "residual");
    require_compatible(*grid_, phi_next.grid(), "residual");

    const double eps2 = params_.epsilon * params_.epsilon;
    RealField flux(phi_curr.grid_ptr());

    RealField mix(phi_curr.grid_ptr());
    for (std::size_t m = 0; m < mix.size(); ++m)
        mix.values()[m] = 0.75 * phi_next.values()[m] + 0.25 * phi_prev.values()[m];
    const RealField nonlocal = nonlocal_apply(*kernel_, mix);

    if (params_.cubic_term) {
        const RealField cc = filtered_cube(phi_curr, dealias_keep_);
        const RealField cp = filtered_cube(phi_prev, dealias_keep_);
        for (std::size_t m = 0; m < flux.size(); ++m)
            flux.values()[m] = 1.5 * cc.values()[m] - 0.5 * cp.values()[m];
    }
    for (std::size_t m = 0; m < flux.size(); ++m) {
        const double pc = phi_curr.values()[m];
        const double pp = phi_prev.values()[m];
        const double pn = phi_next.values()[m];
        flux.values()[m] += -(1.5 * pc - 0.5 * pp) + params_.A0 * (pn - 2.0 * pc + pp) +
                            params_.A1 * params_.dt * (pn - pc) +
                            eps2 * nonlocal.values()[m];
    }

    const RealField lap = laplacian(flux);
    RealField defect(phi_curr.grid_ptr());
    for (std::size_t m = 0; m < defect.size(); ++m)
        defect.values()[m] = (phi_next.values()[m] - phi_curr.values()[m]) / params_.dt -
                             lap.values()[m];
    return norm(defect, 2.0);
}

namespace {

void spectral_first_order(const Grid& g, const Kernel& k, const SchemeParams& p,
                          const cvec& hat0, const cvec& cube0, cvec& hat1) {
    const double eps2 = p.epsilon * p.epsilon;
    hat1.resize(g.size());
    hat1[0] = hat0[0];
    for (std::size_t m = 1; m < g.size(); ++m) {
        const double lam = g.lambda()[m];
        const double sig = k.sigma()[m];
        const std::complex<double> cube_term = p.cubic_term ? cube0[m]
                                                            : std::complex<double>(0.0);
        const std::complex<double> rhs =
            hat0[m] / p.dt - lam * (cube_term - hat0[m] - p.init_A * hat0[m]);
        hat1[m] = rhs / (1.0 / p.dt + lam * p.init_A + eps2 * lam * sig);
    }
}

// d phi/dt = Lap(phi^3 - phi + eps^2 L phi) in raw bins.
void explicit_rhs(const Grid& g, const Kernel& k, const SchemeParams& p,
                  const cvec& hat, const cvec& cube_hat, cvec& rhs) {
    const double eps2 = p.epsilon * p.epsilon;
    rhs.resize(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double lam = g.lambda()[m];
        const double sig = k.sigma()[m];
        const std::complex<double> cube_term = p.cubic_term ? cube_hat[m]
                                                            : std::complex<double>(0.0);
        rhs[m] = -lam * (cube_term - hat[m] + eps2 * sig * hat[m]);
    }
}

} // namespace

RealField first_order_step(const SchemeParams& params, GridPtr grid,
                           const Kernel& kernel, const RealField& phi0) {
    require_compatible(*grid, phi0.grid(), "first_order_step");
    require_compatible(*grid, kernel.grid(), "first_order_step");
    const double g0 = gamma0(kernel, params.epsilon);
    if (!(g0 > 0.0))
        throw ConfigError("first_order_step: gamma0 = " + std::to_string(g0) +
                          " must be positive");

    const Grid& g = *grid;
    cvec hat0 = forward_raw(g, phi0.values());
    cvec cube0 = forward_raw(g, cubed(phi0.values()));
    if (params.dealias)
        apply_mask(make_dealias_mask(g), cube0);

    cvec hat1;
    spectral_first_order(g, kernel, params, hat0, cube0, hat1);

    RealField out(phi0.grid_ptr());
    inverse_raw(g, hat1, out.values());
    check_finite(g, out.values(), params.dt);
    return out;
}

RealField rk2_step(const SchemeParams& params, GridPtr grid,
                   const Kernel& kernel, const RealField& phi0) {
    require_compatible(*grid, phi0.grid(), "rk2_step");
    require_compatible(*grid, kernel.grid(), "rk2_step");

    const Grid& g = *grid;
    const std::vector<unsigned char> keep =
        params.dealias ? make_dealias_mask(g) : std::vector<unsigned char>{};

    cvec hat0 = forward_raw(g, phi0.values());
    cvec cube0 = forward_raw(g, cubed(phi0.values()));
    apply_mask(keep, cube0);

    cvec k1, k2;
    explicit_rhs(g, kernel, params, hat0, cube0, k1);

    cvec hat_star(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        hat_star[m] = hat0[m] + params.dt * k1[m];

    std::vector<double> phi_star;
    inverse_raw(g, hat_star, phi_star);
    check_finite(g, phi_star, params.dt);
    cvec cube_star = forward_raw(g, cubed(phi_star));
    apply_mask(keep, cube_star);
    explicit_rhs(g, kernel, params, hat_star, cube_star, k2);

    cvec hat1(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        hat1[m] = hat0[m] + 0.5 * params.dt * (k1[m] + k2[m]);
    hat1[0] = hat0[0];

    RealField out(phi0.grid_ptr());
    inverse_raw(g, hat1, out.values());
    check_finite(g, out.values(), params.dt);
    return out;
}

void Schedule::validate() const {
    if (segments.empty())
        throw ConfigError("schedule: must contain at least one segment");
    double prev_end = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const ScheduleSegment& s = segments[i];
        if (!(s.dt > 0.0))
            throw ConfigError("schedule: segment " + std::to_string(i) +
                              " has non-positive dt");
        if (!(s.t_end > prev_end))
            throw ConfigError("schedule: t_end values must be strictly increasing "
                              "(segment " + std::to_string(i) + ")");
        prev_end = s.t_end;
    }
}

namespace {

struct RecordSink {
    const RunObservers& obs;
    RunResult& result;
    void emit(const EnergyRecord& r) {
        result.records.push_back(r);
        if (obs.on_record)
            obs.on_record(r);
    }
};

} // namespace

RunResult run_schedule(const SchemeParams& params, GridPtr grid,
                       const Kernel& kernel, const Schedule& schedule,
                       const RealField& phi0, const RunObservers& observers) {
    schedule.validate();
    require_compatible(*grid, phi0.grid(), "run_schedule");
    const Grid& g = *grid;
    const double eps = params.epsilon;

    RunResult result;
    RecordSink sink{observers, result};

    std::vector<double> snapshot_times = observers.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
    std::size_t snap_idx = 0;

    RealField phi_prevprev(grid);
    RealField phi_prev(grid);
    RealField phi_curr = phi0;
    check_finite(g, phi_curr.values(), 0.0);

    cvec hat_curr = forward_raw(g, phi_curr.values());
    cvec hat_prev, cube_hat_prev;
    cvec cube_hat_curr = forward_raw(g, cubed(phi_curr.values()));

    const std::vector<unsigned char> keep =
        params.dealias ? make_dealias_mask(g) : std::vector<unsigned char>{};
    apply_mask(keep, cube_hat_curr);

    double t = 0.0;
    long long n_global = 0;
    bool triple_valid = false;
    double current_dt = schedule.segments.front().dt;

    auto make_record = [&](double dt_in_force) {
        EnergyRecord r;
        r.t = t;
        r.mass = mass(phi_curr);
        r.E = energy(phi_curr, kernel, eps);
        r.linf = 0.0;
        r.min = phi_curr.values()[0];
        r.max = phi_curr.values()[0];
        for (double v : phi_curr.values()) {
            r.linf = std::max(r.linf, std::abs(v));
            r.min = std::min(r.min, v);
            r.max = std::max(r.max, v);
        }
        r.dt = dt_in_force;
        if (observers.m0 && triple_valid) {
            EnergyParams ep{eps, *observers.m0, params.A0, params.A1};
            r.E_mod = modified_energy(phi_curr, phi_prev, phi_prevprev, kernel, ep,
                                      dt_in_force);
        }
        return r;
    };

    auto fire_snapshots = [&]() {
        while (snap_idx < snapshot_times.size()) {
            const double target = snapshot_times[snap_idx];
            if (t + 1e-9 * std::max(1.0, std::abs(target)) < target)
                break;
            if (observers.on_snapshot)
                observers.on_snapshot(phi_curr, t);
            ++snap_idx;
        }
    };

    if (observers.energy_every > 0)
        sink.emit(make_record(current_dt));
    fire_snapshots();

    double seg_start = 0.0;
    for (const ScheduleSegment& seg : schedule.segments) {
        SchemeParams p = params;
        p.dt = seg.dt;
        current_dt = seg.dt;
        const double span = seg.t_end - seg_start;
        long long n_steps = std::llround(span / seg.dt);
        if (n_steps < 1)
            n_steps = 1;

        Stepper stepper(p, grid, kernel);

        for (long long i = 0; i < n_steps; ++i) {
            cvec hat_next(g.size());
            if (i == 0) {
                // Fresh two-step history for this step size.
                if (params.init_method == InitMethod::Rk2) {
                    RealField next = rk2_step(p, grid, kernel, phi_curr);
                    hat_next = forward_raw(g, next.values());
                } else {
                    spectral_first_order(g, kernel, p, hat_curr, cube_hat_curr, hat_next);
                }
                triple_valid = false;
            } else {
                cvec nl(g.size(), 0.0);
                if (p.cubic_term)
                    for (std::size_t m = 0; m < g.size(); ++m)
                        nl[m] = 1.5 * cube_hat_curr[m] - 0.5 * cube_hat_prev[m];
                spectral_cn2(stepper, hat_prev, hat_curr, nl, hat_next);
                triple_valid = true;
            }

            RealField phi_next(phi_curr.grid_ptr());
            inverse_raw(g, hat_next, phi_next.values());
            t = seg_start + static_cast<double>(i + 1) * seg.dt;
            check_finite(g, phi_next.values(), t);

            phi_prevprev = std::move(phi_prev);
            phi_prev = std::move(phi_curr);
            phi_curr = std::move(phi_next);
            hat_prev = std::move(hat_curr);
            hat_curr = std::move(hat_next);
            cube_hat_prev = std::move(cube_hat_curr);
            cube_hat_curr = forward_raw(g, cubed(phi_curr.values()));
            apply_mask(keep, cube_hat_curr);
            ++n_global;

            if (observers.on_step) {
                StepperState view{phi_prev, phi_curr, t, n_global};
                observers.on_step(view, seg.dt);
            }
            const bool last = (&seg == &schedule.segments.back()) && i == n_steps - 1;
            if (observers.energy_every > 0 &&
                (n_global % observers.energy_every == 0 || last))
                sink.emit(make_record(seg.dt));
            fire_snapshots();
        }
        seg_start = seg_start + static_cast<double>(n_steps) * seg.dt;
    }

    result.state = StepperState{std::move(phi_prev), std::move(phi_curr), t, n_global};
    return result;
}

} // namespace nch
