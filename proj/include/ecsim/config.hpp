#ifndef ECSIM_CONFIG_HPP
#define ECSIM_CONFIG_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "ecsim/emulator.hpp"

namespace ecsim {

/* A fully resolved experiment: the assembled config, the workload, and the
 * normalized key/value view (useful for embedding into reports). */
struct LoadedExperiment {
  ExperimentConfig config;
  Workload workload;
  nlohmann::json resolved; // flat dotted-key object of every applied setting
};

/* Parse a single scalar with optional SI suffix (n, u, m, k, M, G); a bare
 * number passes through.  Throws std::runtime_error on garbage. */
double parse_si(const std::string& text);

/* Load an experiment description from a .cfg (dotted keys, `#` comments,
 * `key = value` lines) or .json file; the two formats share one key schema.
 * Unknown keys and missing required settings (energy_model.path) raise
 * std::runtime_error with the offending key named.  Relative paths inside
 * the file resolve against the file's directory. */
LoadedExperiment load_config(const std::string& path);

/* Apply one dotted key to a LoadedExperiment under construction.  Exposed
 * for CLI-side overrides (--set key=value). */
void apply_setting(LoadedExperiment& exp, const std::string& key,
                   const std::string& value, const std::string& base_dir);

/* Finish loading: resolve defaults that depend on other settings (bundled
 * window table, trace loading, fbtc divider design when not pinned). */
void finalize_experiment(LoadedExperiment& exp);

} // namespace ecsim

#endif
