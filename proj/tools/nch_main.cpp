// Command-line driver: schedule-driven runs, the temporal convergence study,
// coarsening with power-law fitting, kernel diagnostics, and standalone
// fitting of a stored energy series.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nch/config.hpp"
#include "nch/experiments.hpp"
#include "nch/io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings)
        std::cerr << "warning: " << w << "\n";
}

int do_simulation(const std::string& config_path,
                  const std::optional<std::string>& out_override, bool with_fit,
                  std::optional<double> tmin, std::optional<double> tmax) {
    const nch::RunConfig cfg = nch::parse_config(config_path);
    const std::string out_dir = out_override.value_or(cfg.output.dir);
    fs::create_directories(out_dir);

    nch::GridPtr grid =
        nch::make_grid(cfg.domain.X1, cfg.domain.X2, cfg.grid.N1, cfg.grid.N2);
    {
        const nch::Kernel probe =
            nch::build_kernel(grid, cfg.model.delta, cfg.model.kernel_image_range);
        print_warnings(probe.warnings());
        if (cfg.m0)
            print_warnings(nch::stabilization_warnings(cfg.scheme.A0, cfg.scheme.A1,
                                                       *cfg.m0));
        const double g0 = nch::gamma0(probe, cfg.model.epsilon);
        std::cout << "gamma0 = " << g0 << "\n";
    }

    int snapshot_index = 0;
    auto on_snapshot = [&](const nch::RealField& phi, double t) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%03d", snapshot_index++);
        const fs::path base = fs::path(out_dir) / name;
        nch::write_snapshot(phi, t, base.string() + ".nchf");
        nch::write_pgm(phi, base.string() + ".pgm");
        std::cout << name << " written at t = " << t << "\n";
    };

    const nch::CoarseningResult result = nch::coarsening_run(cfg, on_snapshot);
    const fs::path csv_path = fs::path(out_dir) / "energy.csv";
    nch::write_energy_csv(result.records, csv_path.string());
    std::cout << "energy series: " << csv_path.string() << " ("
              << result.records.size() << " records)\n";

    if (result.diverged) {
        std::cerr << "error: " << result.divergence_message << "\n";
        return kExitDiverged;
    }

    if (!result.records.empty()) {
        const nch::EnergyRecord& last = result.records.back();
        std::cout << "final: t = " << last.t << ", mass = " << last.mass
                  << ", E = " << last.E << ", ||phi||_inf = " << last.linf << "\n";
    }

    if (with_fit) {
        const double T = cfg.t_final();
        const double lo = tmin.value_or(10.0);
        const double hi = tmax.value_or(0.8 * T);
        const nch::PowerLawFit fit = nch::fit_power_law(result.records, lo, hi);
        std::printf("fit: m_e=%.6g b_e=%.6g residual_rms=%.3g n_points=%d "
                    "window=[%g, %g]\n",
                    fit.m_e, fit.b_e, fit.residual_rms, fit.n_points, fit.t_min,
                    fit.t_max);
    }
    return kExitOk;
}

int do_converge(const std::string& config_path) {
    const nch::ConvergenceConfig cfg = nch::parse_convergence_config(config_path);
    const nch::ConvergenceResult result = nch::convergence_study(cfg);

    std::printf("%-14s %-22s %-10s\n", "dt", "l2_error", "rate");
    bool any_diverged = result.benchmark_diverged;
    for (const nch::ConvergenceRow& row : result.rows) {
        if (row.diverged) {
            std::printf("%-14.8g %-22s %-10s\n", row.dt, "diverged", "-");
            any_diverged = true;
        } else if (row.observed_rate) {
            std::printf("%-14.8g %-22.16g %-10.4f\n", row.dt, row.l2_error,
                        *row.observed_rate);
        } else {
            std::printf("%-14.8g %-22.16g %-10s\n", row.dt, row.l2_error, "");
        }
    }
    std::printf("benchmark dt = %.8g\n", result.dt_ref);
    std::printf("mean rate = %.4f, ls slope = %.4f\n", result.mean_rate,
                result.ls_slope);
    return any_diverged ? kExitDiverged : kExitOk;
}

int do_kernel_check(double delta, double epsilon, int nx, double X, int ny,
                    double Y, int image_range) {
    if (ny <= 0)
        ny = nx;
    if (Y <= 0.0)
        Y = X;
    nch::GridPtr grid = nch::make_grid(X, Y, nx, ny);
    const nch::Kernel kernel = nch::build_kernel(grid, delta, image_range);
    print_warnings(kernel.warnings());
    const nch::KernelReport report = nch::verify_conditions(kernel, epsilon);

    nlohmann::json j;
    j["delta"] = delta;
    j["epsilon"] = epsilon;
    j["j_star_one"] = report.j_star_one;
    j["gamma0"] = report.gamma0;
    j["gamma0_positive"] = report.gamma0_positive;
    j["second_moment"] = report.second_moment;
    j["min_sample"] = report.min_sample;
    j["max_symbol_negativity"] = report.max_symbol_negativity;
    j["evenness_residual"] = report.evenness_residual;
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int do_fit(const std::string& csv_path, double tmin, double tmax) {
    const std::vector<nch::EnergyRecord> records = nch::read_energy_csv(csv_path);
    const nch::PowerLawFit fit = nch::fit_power_law(records, tmin, tmax);
    std::printf("m_e=%.6g b_e=%.6g residual_rms=%.3g n_points=%d window=[%g, %g]\n",
                fit.m_e, fit.b_e, fit.residual_rms, fit.n_points, fit.t_min,
                fit.t_max);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-spectral simulator for the nonlocal Cahn-Hilliard flow"};
    app.require_subcommand(1);

    std::string config_path, out_dir, csv_path;
    bool have_out = false;
    double delta = 0.05, epsilon = 0.1, X = 1.0, Y = 0.0;
    int nx = 512, ny = 0, image_range = 1;
    double tmin = 0.0, tmax = 0.0;
    bool have_tmin = false, have_tmax = false;

    CLI::App* run = app.add_subcommand("run", "integrate a configured schedule");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { have_out = true; });

    CLI::App* converge =
        app.add_subcommand("converge", "temporal self-convergence study");
    converge->add_option("--config", config_path, "JSON study configuration")
        ->required();

    CLI::App* coarsen =
        app.add_subcommand("coarsen", "coarsening run with power-law fit");
    coarsen->add_option("--config", config_path, "JSON run configuration")->required();
    coarsen->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { have_out = true; });
    coarsen->add_option("--tmin", tmin, "fit window start (default 10)")
        ->each([&](const std::string&) { have_tmin = true; });
    coarsen->add_option("--tmax", tmax, "fit window end (default 0.8*T)")
        ->each([&](const std::string&) { have_tmax = true; });

    CLI::App* kernel_check =
        app.add_subcommand("kernel-check", "kernel diagnostics report");
    kernel_check->add_option("--delta", delta, "kernel width")->required();
    kernel_check->add_option("--epsilon", epsilon, "interface parameter")->required();
    kernel_check->add_option("--nx", nx, "modes per direction")->required();
    kernel_check->add_option("--X", X, "domain half-width")->required();
    kernel_check->add_option("--ny", ny, "modes in y (default: nx)");
    kernel_check->add_option("--Y", Y, "half-width in y (default: X)");
    kernel_check->add_option("--image-range", image_range, "periodization images");

    CLI::App* fit = app.add_subcommand("fit", "power-law fit of an energy CSV");
    fit->add_option("--csv", csv_path, "energy CSV path")->required();
    fit->add_option("--tmin", tmin, "fit window start")->required();
    fit->add_option("--tmax", tmax, "fit window end")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const std::optional<std::string> out =
            have_out ? std::optional<std::string>(out_dir) : std::nullopt;
        if (run->parsed())
            return do_simulation(config_path, out, false, {}, {});
        if (converge->parsed())
            return do_converge(config_path);
        if (coarsen->parsed())
            return do_simulation(config_path, out, true,
                                 have_tmin ? std::optional<double>(tmin) : std::nullopt,
                                 have_tmax ? std::optional<double>(tmax) : std::nullopt);
        if (kernel_check->parsed())
            return do_kernel_check(delta, epsilon, nx, X, ny, Y, image_range);
        if (fit->parsed())
            return do_fit(csv_path, tmin, tmax);
    } catch (const nch::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const nch::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const nch::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
