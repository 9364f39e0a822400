#pragma once

// Configuration objects for the CLI entry points and the experiment
// harnesses, plus the strict JSON parsers that build them. Unknown keys,
// missing fields, and invariant violations are all reported as ConfigError
// with the offending key path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nch/stepper.hpp"

namespace nch {

enum class InitKind { SineBump, Constant, Random };

struct InitialCondition {
    InitKind kind = InitKind::SineBump;
    double amplitude = 0.5;
    double offset = 0.1;
    std::uint64_t seed = 0;
};

struct DomainConfig {
    double X1 = 1.0;
    double X2 = 1.0;
};

struct GridConfig {
    int N1 = 128;
    int N2 = 128;
};

struct ModelConfig {
    double epsilon = 0.1;
    double delta = 0.05;
    int kernel_image_range = 1;
};

struct SchemeConfig {
    double A0 = 2.0;
    double A1 = 5.0;
    bool dealias = false;
    InitMethod init_method = InitMethod::FirstOrderStabilized;
    double init_A = 2.0;
};

struct OutputConfig {
    std::string dir = "out";
    int energy_every_steps = 1;
    std::vector<double> snapshot_times;
};

struct RunConfig {
    DomainConfig domain;
    GridConfig grid;
    ModelConfig model;
    SchemeConfig scheme;
    Schedule schedule;
    InitialCondition initial;
    OutputConfig output;
    std::optional<double> m0;

    double t_final() const { return schedule.segments.back().t_end; }
    SchemeParams scheme_params(double dt) const {
        SchemeParams p;
        p.epsilon = model.epsilon;
        p.A0 = scheme.A0;
        p.A1 = scheme.A1;
        p.dt = dt;
        p.dealias = scheme.dealias;
        p.init_method = scheme.init_method;
        p.init_A = scheme.init_A;
        return p;
    }
};

struct ConvergenceConfig {
    double X1 = 1.0, X2 = 1.0;
    int N1 = 128, N2 = 128;
    double epsilon = 0.1;
    double delta = 0.05;
    int kernel_image_range = 1;
    double A0 = 2.0, A1 = 5.0;
    bool dealias = false;
    InitMethod init_method = InitMethod::FirstOrderStabilized;
    double init_A = 2.0;
    double dt_base = 0.005;
    int k_max = 4;            // ladder dt = dt_base * 2^-k, k = 0..k_max
    double dt_ref = 0.0;      // benchmark step; 0 -> dt_base * 2^-k_max / 8
    double t_final = 0.05;
    InitialCondition initial{InitKind::SineBump, 0.5, 0.1, 0};
    int threads = 0;          // 0 -> NCH_THREADS env or hardware concurrency
};

RunConfig parse_config(const std::string& path);
ConvergenceConfig parse_convergence_config(const std::string& path);

} // namespace nch
