#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bcpo/bcpo_loop.hpp"

namespace bcpo::cli {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& w) : std::runtime_error(w) {}
};

// Fully resolved defaults: the published schema. Every valid config key
// appears here with its default value.
nlohmann::ordered_json default_config_json();

// Merge a user config over the defaults. Unknown keys anywhere in the tree
// are rejected with a field-level message; type mismatches likewise.
nlohmann::ordered_json resolve_config(const nlohmann::json& user);

// "a.b.c=value" overrides applied on top of a resolved config.
void apply_override(nlohmann::ordered_json& cfg, const std::string& spec);

loop::TrainConfig train_config_from_json(const nlohmann::ordered_json& resolved);

nlohmann::ordered_json load_config_file(const std::string& path,
                                        const std::vector<std::string>& overrides);

// Run manifest: resolved config, seed, binary content hash, thread count.
nlohmann::ordered_json make_manifest(const nlohmann::ordered_json& resolved_config);

}  // namespace bcpo::cli
