#include "nch/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

namespace nch {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config: cannot open '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError("config: " + where + " must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key '" + where + "." + item.key() + "'");
    }
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError("config: missing key '" + where + "." + key + "'");
    return *it;
}

double get_num(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_number())
        throw ConfigError("config: '" + where + "." + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        throw ConfigError("config: '" + where + "." + key + "' must be finite");
    return d;
}

double get_num_or(const json& obj, const std::string& where, const char* key,
                  double fallback) {
    return obj.contains(key) ? get_num(obj, where, key) : fallback;
}

int get_int(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_number_integer())
        throw ConfigError("config: '" + where + "." + key + "' must be an integer");
    return v.get<int>();
}

bool get_bool_or(const json& obj, const std::string& where, const char* key,
                 bool fallback) {
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean())
        throw ConfigError("config: '" + where + "." + key + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_string())
        throw ConfigError("config: '" + where + "." + key + "' must be a string");
    return v.get<std::string>();
}

InitMethod parse_init_method(const std::string& s, const std::string& where) {
    if (s == "first_order_stabilized")
        return InitMethod::FirstOrderStabilized;
    if (s == "rk2")
        return InitMethod::Rk2;
    throw ConfigError("config: '" + where +
                      ".init_method' must be 'first_order_stabilized' or 'rk2'");
}

DomainConfig parse_domain(const json& j, const std::string& where) {
    check_keys(j, where, {"X1", "X2"});
    DomainConfig d;
    d.X1 = get_num(j, where, "X1");
    d.X2 = get_num(j, where, "X2");
    if (!(d.X1 > 0.0) || !(d.X2 > 0.0))
        throw ConfigError("config: '" + where + "' half-widths must be positive");
    return d;
}

GridConfig parse_grid(const json& j, const std::string& where) {
    check_keys(j, where, {"N1", "N2"});
    GridConfig g;
    g.N1 = get_int(j, where, "N1");
    g.N2 = get_int(j, where, "N2");
    if (g.N1 < 4 || g.N2 < 4 || g.N1 % 2 || g.N2 % 2)
        throw ConfigError("config: '" + where + "' mode counts must be even and >= 4");
    return g;
}

ModelConfig parse_model(const json& j, const std::string& where) {
    check_keys(j, where, {"epsilon", "delta", "kernel_image_range"});
    ModelConfig m;
    m.epsilon = get_num(j, where, "epsilon");
    m.delta = get_num(j, where, "delta");
    m.kernel_image_range = j.contains("kernel_image_range")
                               ? get_int(j, where, "kernel_image_range")
                               : 1;
    if (!(m.epsilon > 0.0))
        throw ConfigError("config: '" + where + ".epsilon' must be positive");
    if (!(m.delta > 0.0))
        throw ConfigError("config: '" + where + ".delta' must be positive");
    if (m.kernel_image_range < 0)
        throw ConfigError("config: '" + where + ".kernel_image_range' must be >= 0");
    return m;
}

SchemeConfig parse_scheme(const json& j, const std::string& where) {
    check_keys(j, where, {"A0", "A1", "dealias", "init_method", "init_A"});
    SchemeConfig s;
    s.A0 = get_num(j, where, "A0");
    s.A1 = get_num(j, where, "A1");
    if (s.A0 < 0.0 || s.A1 < 0.0)
        throw ConfigError("config: '" + where + "' stabilization constants must be >= 0");
    s.dealias = get_bool_or(j, where, "dealias", false);
    if (j.contains("init_method"))
        s.init_method = parse_init_method(get_string(j, where, "init_method"), where);
    s.init_A = get_num_or(j, where, "init_A", 2.0);
    return s;
}

Schedule parse_schedule(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ConfigError("config: '" + where + "' must be a non-empty array");
    Schedule sched;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string seg_where = where + "[" + std::to_string(i) + "]";
        check_keys(j[i], seg_where, {"t_end", "dt"});
        ScheduleSegment seg;
        seg.t_end = get_num(j[i], seg_where, "t_end");
        seg.dt = get_num(j[i], seg_where, "dt");
        sched.segments.push_back(seg);
    }
    try {
        sched.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("config: '" + where + "': " + e.what());
    }
    return sched;
}

InitialCondition parse_initial(const json& j, const std::string& where) {
    check_keys(j, where, {"type", "amplitude", "offset", "seed"});
    InitialCondition ic;
    const std::string type = get_string(j, where, "type");
    if (type == "sine_bump") {
        ic.kind = InitKind::SineBump;
        ic.amplitude = get_num(j, where, "amplitude");
        ic.offset = get_num_or(j, where, "offset", 0.0);
    } else if (type == "constant") {
        ic.kind = InitKind::Constant;
        ic.offset = get_num(j, where, "offset");
    } else if (type == "random") {
        ic.kind = InitKind::Random;
        ic.amplitude = get_num(j, where, "amplitude");
        if (!(ic.amplitude > 0.0))
            throw ConfigError("config: '" + where + ".amplitude' must be positive");
        const json& seed = require(j, where, "seed");
        if (!seed.is_number_unsigned() && !seed.is_number_integer())
            throw ConfigError("config: '" + where + ".seed' must be an integer");
        ic.seed = seed.get<std::uint64_t>();
    } else {
        throw ConfigError("config: '" + where +
                          ".type' must be 'sine_bump', 'constant', or 'random'");
    }
    return ic;
}

OutputConfig parse_output(const json& j, const std::string& where) {
    check_keys(j, where, {"dir", "energy_every_steps", "snapshot_times"});
    OutputConfig o;
    if (j.contains("dir"))
        o.dir = get_string(j, where, "dir");
    if (j.contains("energy_every_steps")) {
        o.energy_every_steps = get_int(j, where, "energy_every_steps");
        if (o.energy_every_steps < 0)
            throw ConfigError("config: '" + where + ".energy_every_steps' must be >= 0");
    }
    if (j.contains("snapshot_times")) {
        const json& times = j.at("snapshot_times");
        if (!times.is_array())
            throw ConfigError("config: '" + where + ".snapshot_times' must be an array");
        for (const json& v : times) {
            if (!v.is_number() || !std::isfinite(v.get<double>()))
                throw ConfigError("config: '" + where +
                                  ".snapshot_times' entries must be finite numbers");
            o.snapshot_times.push_back(v.get<double>());
        }
    }
    return o;
}

} // namespace

RunConfig parse_config(const std::string& path) {
    const json j = load_json(path);
    check_keys(j, "<root>",
               {"domain", "grid", "model", "scheme", "schedule", "initial", "output",
                "m0"});

    RunConfig cfg;
    cfg.domain = parse_domain(require(j, "<root>", "domain"), "domain");
    cfg.grid = parse_grid(require(j, "<root>", "grid"), "grid");
    cfg.model = parse_model(require(j, "<root>", "model"), "model");
    cfg.scheme = parse_scheme(require(j, "<root>", "scheme"), "scheme");
    cfg.schedule = parse_schedule(require(j, "<root>", "schedule"), "schedule");
    cfg.initial = parse_initial(require(j, "<root>", "initial"), "initial");
    if (j.contains("output"))
        cfg.output = parse_output(j.at("output"), "output");
    if (j.contains("m0")) {
        cfg.m0 = get_num(j, "<root>", "m0");
        if (!(*cfg.m0 > 0.0))
            throw ConfigError("config: 'm0' must be positive");
    }
    return cfg;
}

ConvergenceConfig parse_convergence_config(const std::string& path) {
    const json j = load_json(path);
    check_keys(j, "<root>",
               {"domain", "grid", "model", "scheme", "study", "initial", "threads"});

    ConvergenceConfig cfg;
    if (j.contains("domain")) {
        const DomainConfig d = parse_domain(j.at("domain"), "domain");
        cfg.X1 = d.X1;
        cfg.X2 = d.X2;
    }
    const GridConfig g = parse_grid(require(j, "<root>", "grid"), "grid");
    cfg.N1 = g.N1;
    cfg.N2 = g.N2;
    const ModelConfig m = parse_model(require(j, "<root>", "model"), "model");
    cfg.epsilon = m.epsilon;
    cfg.delta = m.delta;
    cfg.kernel_image_range = m.kernel_image_range;
    if (j.contains("scheme")) {
        const SchemeConfig s = parse_scheme(j.at("scheme"), "scheme");
        cfg.A0 = s.A0;
        cfg.A1 = s.A1;
        cfg.dealias = s.dealias;
        cfg.init_method = s.init_method;
        cfg.init_A = s.init_A;
    }

    const json& study = require(j, "<root>", "study");
    check_keys(study, "study", {"dt_base", "k_max", "dt_ref", "t_final"});
    cfg.dt_base = get_num(study, "study", "dt_base");
    cfg.k_max = get_int(study, "study", "k_max");
    cfg.dt_ref = get_num_or(study, "study", "dt_ref", 0.0);
    cfg.t_final = get_num(study, "study", "t_final");
    if (!(cfg.dt_base > 0.0) || !(cfg.t_final > 0.0))
        throw ConfigError("config: 'study.dt_base' and 'study.t_final' must be positive");
    if (cfg.k_max < 0)
        throw ConfigError("config: 'study.k_max' must be >= 0");
    if (cfg.dt_ref > 0.0 &&
        cfg.dt_ref > cfg.dt_base * std::pow(2.0, -cfg.k_max) / 4.0)
        throw ConfigError("config: 'study.dt_ref' must be at most a quarter of the "
                          "finest ladder step");

    if (j.contains("initial"))
        cfg.initial = parse_initial(j.at("initial"), "initial");
    if (j.contains("threads")) {
        cfg.threads = get_int(j, "<root>", "threads");
        if (cfg.threads < 0)
            throw ConfigError("config: 'threads' must be >= 0");
    }
    return cfg;
}

} // namespace nch
