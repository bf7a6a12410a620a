#pragma once
// Flat key-value run configuration files.

#include <stdexcept>
#include <string>

#include "pf/core.hpp"

namespace pf {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ProviderSettings {
    std::string base_url;
    std::string api_key;
};

struct LoadedConfig {
    RunConfig run;
    ProviderSettings provider;
    std::string prompt_dir;  // optional override directory for templates
};

// Lines of "key = value"; '#' starts a comment. Unknown keys are errors.
// Recognized keys: <role>_model, <role>_temperature (role in generator,
// monitor, refiner, annotator, regulator, postprocessor), max_rounds,
// revision_cap, n_persuaders, seed, base_url, api_key, prompt_dir.
LoadedConfig load_config_file(const std::string& path);

// PF_BASE_URL / PF_API_KEY override file values (credentials only).
void apply_env_overrides(ProviderSettings& settings);

}  // namespace pf
