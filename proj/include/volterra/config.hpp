#pragma once

#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/reference_models.hpp"

namespace volterra {

/// INI run configuration: sections [grid], [plant], [model], [signals],
/// [optimize], [solve], [control], plain `key = value` lines. Keys are
/// addressed as "section.key". Relative paths resolve against the directory
/// of the config file.
class RunConfig {
 public:
  RunConfig() = default;

  /// Throws IoError when the file cannot be read and ConfigError on syntax
  /// errors or unknown sections.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& text, std::filesystem::path base_dir = ".");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> find_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers; empty when the key is absent.
  std::vector<double> get_list(const std::string& key) const;
  /// Resolved path; throws IoError when `must_exist` and the file is missing.
  std::filesystem::path get_path(const std::string& key, bool must_exist = true) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);

  /// [grid] h and n; either may be replaced by [grid] T (horizon).
  TimeGrid grid() const;
  HeatExchangerParams plant_hx() const;

  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

 private:
  boost::property_tree::ptree tree_;
  std::filesystem::path base_dir_ = ".";
};

}  // namespace volterra
