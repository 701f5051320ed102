/**
 * @file config.hpp
 * @brief Flat key-value configuration files.
 *
 * One `key = value` per line, `#` starts a comment. Vector values are
 * whitespace separated. Unknown keys and malformed values raise ConfigError.
 * Leg geometry starts from EstimatorConfig::quadruped(); `legs = N` resizes it
 * and `leg.<i>.<field>` overrides single legs.
 */

#pragma once

#include <legodom/estimator.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace legodom
{

EstimatorConfig parseConfig(std::string_view text);

EstimatorConfig loadConfig(const std::filesystem::path& path);

/// Applies one key/value pair to @p config (exposed for tests and CLI overrides).
void applyConfigValue(EstimatorConfig& config, std::string_view key, std::string_view value);

/// Renders every key with its current value, in a form parseConfig accepts.
std::string formatConfig(const EstimatorConfig& config);

} // namespace legodom
