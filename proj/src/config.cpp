#include "optlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "optlab/csv.hpp"

namespace optlab {

std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::reddi: return "reddi";
        case ExperimentKind::function: return "function";
        case ExperimentKind::smoke: return "smoke";
        case ExperimentKind::adaptivity: return "adaptivity";
        case ExperimentKind::ablation: return "ablation";
    }
    throw std::logic_error("experiment_name: unknown kind");
}

ExperimentKind parse_experiment(const std::string& s) {
    if (s == "reddi") return ExperimentKind::reddi;
    if (s == "function") return ExperimentKind::function;
    if (s == "smoke") return ExperimentKind::smoke;
    if (s == "adaptivity") return ExperimentKind::adaptivity;
    if (s == "ablation") return ExperimentKind::ablation;
    throw ConfigError("experiment: unknown value '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value,
                          Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list element");
        out.push_back(static_cast<T>(parse(key, item)));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& raw_value) {
    const std::string value = trim(raw_value);
    if (key == "experiment") {
        cfg.experiment = parse_experiment(value);
    } else if (key == "optimizer") {
        try {
            cfg.optimizer = parse_kind(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("optimizer: ") + e.what());
        }
    } else if (key == "function") {
        cfg.function = value;
    } else if (key == "gamma") {
        cfg.gamma = parse_double(key, value);
    } else if (key == "lr") {
        cfg.lr = parse_double(key, value);
    } else if (key == "schedule") {
        try {
            cfg.schedule = parse_schedule_kind(value);
            cfg.schedule_set = true;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("schedule: ") + e.what());
        }
    } else if (key == "beta1") {
        cfg.beta1 = parse_double(key, value);
    } else if (key == "beta2") {
        cfg.beta2 = parse_double(key, value);
    } else if (key == "beta3") {
        cfg.beta3 = parse_double(key, value);
    } else if (key == "ratio") {
        cfg.ratio = static_cast<int>(parse_int(key, value));
    } else if (key == "epsilon") {
        cfg.epsilon = parse_double(key, value);
    } else if (key == "padam_p") {
        cfg.padam_p = parse_double(key, value);
    } else if (key == "bound_scale") {
        cfg.bound_scale = parse_double(key, value);
    } else if (key == "paper_literal") {
        cfg.paper_literal = parse_bool(key, value);
    } else if (key == "sgdm_debias") {
        cfg.sgdm_debias = parse_bool(key, value);
    } else if (key == "steps") {
        cfg.steps = parse_int(key, value);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "theta0") {
        cfg.theta0 = parse_double(key, value);
    } else if (key == "start_x") {
        cfg.start_x = parse_double(key, value);
    } else if (key == "start_y") {
        cfg.start_y = parse_double(key, value);
    } else if (key == "weight_decay") {
        cfg.weight_decay = parse_double(key, value);
    } else if (key == "clip_norm") {
        cfg.clip_norm = parse_double(key, value);
    } else if (key == "checkpoints") {
        cfg.checkpoints = parse_list<std::int64_t>(key, value, parse_int);
    } else if (key == "jobs") {
        cfg.jobs = static_cast<int>(parse_int(key, value));
    } else if (key == "trials") {
        cfg.trials = static_cast<int>(parse_int(key, value));
    } else if (key == "gamma_list") {
        cfg.gamma_list = parse_list<double>(key, value, parse_double);
    } else if (key == "beta3_list") {
        cfg.beta3_list = parse_list<double>(key, value, parse_double);
    } else if (key == "ratio_list") {
        cfg.ratio_list = parse_list<int>(key, value, parse_int);
    } else if (key == "lr_list") {
        cfg.lr_list = parse_list<double>(key, value, parse_double);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        auto sep = line.find(':');
        const auto eq = line.find('=');
        if (eq != std::string::npos && (sep == std::string::npos || eq < sep)) {
            sep = eq;
        }
        if (sep == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key: value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, sep));
        const std::string value = trim(line.substr(sep + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        apply_override(cfg, key, value);
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void ExperimentConfig::resolve() {
    if (!schedule_set) {
        schedule = experiment == ExperimentKind::reddi ? ScheduleKind::inverse_sqrt
                                                       : ScheduleKind::constant;
        schedule_set = true;
    }
    if (std::isnan(lr)) {
        lr = experiment == ExperimentKind::reddi ? 0.1 : 0.01;
    }
    if (std::isnan(epsilon)) {
        epsilon = (optimizer == OptimizerKind::anon ||
                   optimizer == OptimizerKind::anon_alt)
                      ? 1e-16
                      : 1e-8;
    }
    if (std::isnan(bound_scale)) {
        // ratio convention: the final clipped scale corresponds to a 0.1
        // effective step for the configured eta0
        bound_scale = lr / 0.1;
    }
    if (steps == 0) {
        switch (experiment) {
            case ExperimentKind::reddi: steps = 10000; break;
            case ExperimentKind::function: steps = 2000; break;
            case ExperimentKind::smoke:
            case ExperimentKind::ablation: steps = 200; break;
            case ExperimentKind::adaptivity: steps = 512; break;
        }
    }
    if (checkpoints.empty()) {
        for (std::int64_t cp = 10; cp <= steps; cp *= 10) checkpoints.push_back(cp);
        if (checkpoints.empty() || checkpoints.back() != steps) {
            checkpoints.push_back(steps);
        }
    }
    validate();
}

void ExperimentConfig::validate() const {
    const auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(beta1 >= 0.0 && beta1 < 1.0, "beta1: must lie in [0,1)");
    check(beta2 >= 0.0 && beta2 < 1.0, "beta2: must lie in [0,1)");
    check(beta3 > 0.0 && beta3 < 1.0, "beta3: must lie in (0,1)");
    check(ratio >= 2, "ratio: must be >= 2");
    check(std::isnan(lr) || lr > 0.0, "lr: must be > 0");
    check(std::isnan(epsilon) || epsilon >= 0.0, "epsilon: must be >= 0");
    if (!std::isnan(epsilon) &&
        (optimizer == OptimizerKind::anon || optimizer == OptimizerKind::anon_alt)) {
        check(epsilon > 0.0 || gamma >= 0.0,
              "epsilon: must be > 0 when gamma is negative");
    }
    check(padam_p > 0.0 && padam_p <= 0.5, "padam_p: must lie in (0, 1/2]");
    check(steps >= 0, "steps: must be >= 0");
    check(trials > 0, "trials: must be > 0");
    check(jobs >= 0, "jobs: must be >= 0");
    for (auto b3 : beta3_list) check(b3 > 0.0 && b3 < 1.0, "beta3_list: values must lie in (0,1)");
    for (auto r : ratio_list) check(r >= 2, "ratio_list: values must be >= 2");
    for (auto l : lr_list) check(l > 0.0, "lr_list: values must be > 0");
    if (experiment == ExperimentKind::function) {
        check(function == "beale-log" || function == "beale_log" ||
                  function == "beale" || function == "rosenbrock" ||
                  function == "rastrigin",
              "function: unknown value '" + function + "'");
    }
}

HyperParams ExperimentConfig::hyper_params() const {
    HyperParams hp;
    hp.beta1 = beta1;
    hp.beta2 = beta2;
    hp.beta3 = beta3;
    hp.epsilon = epsilon;
    hp.gamma = gamma;
    hp.ratio = ratio;
    hp.padam_p = padam_p;
    hp.bound_scale = std::isnan(bound_scale) ? 1.0 : bound_scale;
    hp.paper_literal = paper_literal;
    hp.sgdm_mode = sgdm_debias ? BiasMode::debiased_ema : BiasMode::raw_m;
    return hp;
}

namespace {

template <typename T>
std::string join_list(const std::vector<T>& v,
                      const std::function<std::string(const T&)>& fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

std::string ExperimentConfig::emit() const {
    std::ostringstream out;
    out << "experiment: " << experiment_name(experiment) << "\n";
    out << "optimizer: " << kind_name(optimizer) << "\n";
    out << "function: " << function << "\n";
    out << "gamma: " << format_double(gamma) << "\n";
    out << "lr: " << format_double(lr) << "\n";
    out << "schedule: " << schedule_kind_name(schedule) << "\n";
    out << "beta1: " << format_double(beta1) << "\n";
    out << "beta2: " << format_double(beta2) << "\n";
    out << "beta3: " << format_double(beta3) << "\n";
    out << "ratio: " << ratio << "\n";
    out << "epsilon: " << format_double(epsilon) << "\n";
    out << "padam_p: " << format_double(padam_p) << "\n";
    out << "bound_scale: " << format_double(bound_scale) << "\n";
    out << "paper_literal: " << (paper_literal ? "true" : "false") << "\n";
    out << "sgdm_debias: " << (sgdm_debias ? "true" : "false") << "\n";
    out << "steps: " << steps << "\n";
    out << "seed: " << seed << "\n";
    out << "out: " << out_dir << "\n";
    out << "theta0: " << format_double(theta0) << "\n";
    out << "start_x: " << format_double(start_x) << "\n";
    out << "start_y: " << format_double(start_y) << "\n";
    out << "weight_decay: " << format_double(weight_decay) << "\n";
    out << "clip_norm: " << format_double(clip_norm) << "\n";
    if (!checkpoints.empty()) {
        out << "checkpoints: "
            << join_list<std::int64_t>(checkpoints,
                                       [](const std::int64_t& v) {
                                           return std::to_string(v);
                                       })
            << "\n";
    }
    out << "jobs: " << jobs << "\n";
    out << "trials: " << trials << "\n";
    if (!gamma_list.empty()) {
        out << "gamma_list: "
            << join_list<double>(gamma_list, [](const double& v) {
                   return format_double(v);
               })
            << "\n";
    }
    if (!beta3_list.empty()) {
        out << "beta3_list: "
            << join_list<double>(beta3_list, [](const double& v) {
                   return format_double(v);
               })
            << "\n";
    }
    if (!ratio_list.empty()) {
        out << "ratio_list: "
            << join_list<int>(ratio_list,
                              [](const int& v) { return std::to_string(v); })
            << "\n";
    }
    if (!lr_list.empty()) {
        out << "lr_list: "
            << join_list<double>(lr_list, [](const double& v) {
                   return format_double(v);
               })
            << "\n";
    }
    return out.str();
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j{
        {"experiment", experiment_name(experiment)},
        {"optimizer", kind_name(optimizer)},
        {"function", function},
        {"gamma", gamma},
        {"lr", lr},
        {"schedule", schedule_kind_name(schedule)},
        {"beta1", beta1},
        {"beta2", beta2},
        {"beta3", beta3},
        {"ratio", ratio},
        {"epsilon", epsilon},
        {"padam_p", padam_p},
        {"bound_scale", bound_scale},
        {"paper_literal", paper_literal},
        {"sgdm_debias", sgdm_debias},
        {"steps", steps},
        {"seed", seed},
        {"out", out_dir},
        {"theta0", theta0},
        {"start_x", start_x},
        {"start_y", start_y},
        {"weight_decay", weight_decay},
        {"clip_norm", clip_norm},
        {"checkpoints", checkpoints},
        {"jobs", jobs},
        {"trials", trials},
        {"config_hash", hash()},
    };
    if (!gamma_list.empty()) j["gamma_list"] = gamma_list;
    if (!beta3_list.empty()) j["beta3_list"] = beta3_list;
    if (!ratio_list.empty()) j["ratio_list"] = ratio_list;
    if (!lr_list.empty()) j["lr_list"] = lr_list;
    return j;
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string doc = emit();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace optlab
