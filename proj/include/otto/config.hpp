#ifndef OTTO_CONFIG_HPP
#define OTTO_CONFIG_HPP

#include <string>
#include <vector>

#include "otto/model.hpp"

namespace otto {

/// Flat dotted keys accepted in configuration files, in canonical order.
const std::vector<std::string>& config_keys();

/// Keys that a file without a preset line must provide.
const std::vector<std::string>& required_keys();

const std::vector<std::string>& preset_names();

/// Throws ConfigError for an unknown name.
EngineConfig preset(const std::string& name);

/// Parses "key = value" lines ('#' starts a comment). A "preset = name" line
/// selects the starting point; without one every required key must appear.
/// All problems are collected into one ConfigError.
EngineConfig parse_config(const std::string& text);

/// Applies "key=value" overrides on top of cfg, collecting all problems.
EngineConfig apply_overrides(const EngineConfig& cfg, const std::vector<std::string>& assignments);

/// Range checks on a resolved configuration; empty when valid.
std::vector<std::string> validate(const EngineConfig& cfg);

/// Canonical text form, one key per line in config_keys() order.
std::string render_config(const EngineConfig& cfg);
std::string config_hash(const EngineConfig& cfg);

} // namespace otto

#endif
