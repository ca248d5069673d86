#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "berman/comparison_bounds.hpp"
#include "berman/gaussian_core.hpp"
#include "berman/probability_engine.hpp"
#include "berman/scaling.hpp"

namespace berman::cli {

using nlohmann::json;

/// Malformed or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A JSON object whose keys were checked against an allow-list. Accessors
/// raise ConfigError naming the dotted path of the offending key.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<std::string_view> allowed);

  bool has(std::string_view key) const;
  const json& raw(std::string_view key) const;
  std::string path(std::string_view key) const;

  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  /// Accepts a number or the string "inf".
  double extended(std::string_view key) const;
  std::uint64_t count(std::string_view key) const;
  std::uint64_t count_or(std::string_view key, std::uint64_t fallback) const;
  bool flag_or(std::string_view key, bool fallback) const;
  std::string text(std::string_view key) const;
  std::string text_or(std::string_view key, std::string fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  Section child(std::string_view key, std::initializer_list<std::string_view> allowed) const;

 private:
  const json* j_;
  std::string path_;
};

double as_number(const json& j, const std::string& path);
double as_extended(const json& j, const std::string& path);
std::uint64_t as_count(const json& j, const std::string& path);
std::vector<double> as_numbers(const json& j, const std::string& path);

json load_config(const std::filesystem::path& file);

/// FNV-1a 64 over the canonical (sorted-key, compact) serialization.
std::uint64_t config_hash(const json& config);
std::string hex64(std::uint64_t v);

CorrelationModel parse_correlation(const json& j, const std::string& path);
ScalingModel parse_scaling(const json& j, const std::string& path);
Coupling parse_coupling(const json& j, const std::string& path);
/// {"u": number|array, "v": number|array (optional), "coupling": ...}; a
/// scalar is broadcast to `dim` coordinates and an absent v is one-sided.
RectangleSpec parse_thresholds(const json& j, const std::string& path, std::size_t dim);

}  // namespace berman::cli
