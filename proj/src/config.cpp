#include "pf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>

namespace pf {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long long parse_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const long long v = std::stoll(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: " + value);
    }
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: " + value);
    }
}

std::size_t parse_positive(const std::string& key, const std::string& value) {
    const long long v = parse_integer(key, value);
    if (v < 1) throw ConfigError(key + ": must be >= 1, got " + value);
    return static_cast<std::size_t>(v);
}

}  // namespace

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);

    LoadedConfig cfg;
    std::map<std::string, AgentModel*> models{
        {"generator", &cfg.run.generator},   {"monitor", &cfg.run.monitor},
        {"refiner", &cfg.run.refiner},       {"annotator", &cfg.run.annotator},
        {"regulator", &cfg.run.regulator},   {"postprocessor", &cfg.run.postprocessor},
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));

        bool handled = false;
        for (auto& [role, model] : models) {
            if (key == role + "_model") {
                model->model_id = value;
                handled = true;
            } else if (key == role + "_temperature") {
                model->temperature = parse_number(key, value);
                handled = true;
            }
        }
        if (handled) continue;

        if (key == "max_rounds") {
            cfg.run.max_rounds = parse_positive(key, value);
        } else if (key == "revision_cap") {
            cfg.run.revision_cap = parse_positive(key, value);
        } else if (key == "n_persuaders") {
            cfg.run.n_persuaders = parse_positive(key, value);
        } else if (key == "seed") {
            cfg.run.seed = parse_integer(key, value);
        } else if (key == "base_url") {
            cfg.provider.base_url = value;
        } else if (key == "api_key") {
            cfg.provider.api_key = value;
        } else if (key == "prompt_dir") {
            cfg.prompt_dir = value;
        } else {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                              key + "'");
        }
    }
    return cfg;
}

void apply_env_overrides(ProviderSettings& settings) {
    if (const char* url = std::getenv("PF_BASE_URL"); url && *url) settings.base_url = url;
    if (const char* key = std::getenv("PF_API_KEY"); key && *key) settings.api_key = key;
}

}  // namespace pf
