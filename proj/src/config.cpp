#include "volterra/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <boost/property_tree/ini_parser.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

constexpr std::array<const char*, 7> known_sections{"grid", "plant", "model", "signals", "optimize", "solve", "control"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "" || !std::isfinite(v)) {
    throw ConfigError("[" + key + "]: '" + text + "' is not a finite number");
  }
  return v;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  try {
    return parse(ss.str(), dir);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig RunConfig::parse(const std::string& text, std::filesystem::path base_dir) {
  RunConfig c;
  c.base_dir_ = std::move(base_dir);
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, section] : c.tree_) {
    if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end()) {
      throw ConfigError(section.empty() ? "key '" + name + "' outside any section" : "unknown section [" + name + "]");
    }
  }
  return c;
}

bool RunConfig::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto v = tree_.get_optional<std::string>(key);
  return v ? trim(*v) : fallback;
}

std::string RunConfig::require_string(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v || trim(*v).empty()) throw ConfigError("missing [" + key + "]");
  return trim(*v);
}

std::optional<double> RunConfig::find_double(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) return std::nullopt;
  return to_double(key, *v);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return find_double(key).value_or(fallback);
}

long RunConfig::get_int(const std::string& key, long fallback) const {
  const auto v = find_double(key);
  if (!v) return fallback;
  if (*v != std::floor(*v) || std::abs(*v) > 1e15) throw ConfigError("[" + key + "] must be an integer");
  return static_cast<long>(*v);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) return fallback;
  const auto s = trim(*v);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("[" + key + "]: '" + s + "' is not a boolean");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) return out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::filesystem::path RunConfig::get_path(const std::string& key, bool must_exist) const {
  std::filesystem::path p = require_string(key);
  if (p.is_relative()) p = base_dir_ / p;
  if (must_exist && !std::filesystem::exists(p)) throw IoError("[" + key + "]: file " + p.string() + " not found");
  return p;
}

void RunConfig::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

void RunConfig::set(const std::string& key, double value) { tree_.put(key, fmt::format("{}", value)); }

TimeGrid RunConfig::grid() const {
  const auto h = find_double("grid.h");
  const auto T = find_double("grid.T");
  const long n_raw = get_int("grid.n", 0);
  if (n_raw < 0) throw ConfigError("[grid.n] must be positive");
  std::size_t n = static_cast<std::size_t>(n_raw);
  double step = 0.0;
  if (h && n > 0) {
    step = *h;
  } else if (h && T) {
    if (!(*h > 0.0)) throw ConfigError("[grid.h] must be positive");
    n = static_cast<std::size_t>(std::llround(*T / *h));
    if (n == 0 || std::abs(static_cast<double>(n) * *h - *T) > 1e-9 * *T) {
      throw ConfigError("[grid] T is not a multiple of h");
    }
    step = *h;
  } else if (T && n > 0) {
    step = *T / static_cast<double>(n);
  } else {
    throw ConfigError("[grid] needs two of h, n, T");
  }
  if (!(step > 0.0) || n == 0) throw ConfigError("[grid] needs h > 0 and n >= 1");
  if (n > 100000) throw ConfigError("[grid.n] too large");
  return TimeGrid(step, n);
}

HeatExchangerParams RunConfig::plant_hx() const {
  HeatExchangerParams p;
  p.lambda1 = get_double("plant.lambda1", p.lambda1);
  p.lambda2 = get_double("plant.lambda2", p.lambda2);
  p.D0 = get_double("plant.D0", p.D0);
  p.Q0 = get_double("plant.Q0", p.Q0);
  p.i0 = get_double("plant.i0", p.i0);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[plant]: ") + e.what());
  }
  return p;
}

}  // namespace volterra
