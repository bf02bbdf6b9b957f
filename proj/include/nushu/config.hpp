#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nushu/http_provider.hpp"
#include "nushu/pipeline.hpp"
#include "nushu/provider.hpp"

namespace nushu {

// A small subset of TOML: `[section]` headers, `key = value` lines with
// double-quoted strings, integers, floats, booleans and flat arrays of those,
// and `#` comments. Keys are addressed as "section.key".
class ConfigFile {
 public:
  using Scalar = std::variant<std::string, int64_t, double, bool>;
  using Value = std::variant<std::string, int64_t, double, bool, std::vector<Scalar>>;

  /// Throws ParseError naming the line on malformed input or duplicate keys.
  static ConfigFile parse(std::string_view content, const std::string& name = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, Value>& values() const { return values_; }

  // Typed getters throw ValidationError on a type mismatch. Integers are
  // accepted where a float is expected.
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;
  std::optional<std::vector<int64_t>> get_ints(const std::string& key) const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  void erase(const std::string& key) { values_.erase(key); }

  /// Keys in `allowed` or under one of the allowed "section." prefixes pass;
  /// anything else is a ValidationError, catching typos early.
  void reject_unknown(const std::vector<std::string>& allowed) const;

  /// Canonical rendering, sections in key order. parse(render()) round-trips.
  std::string render() const;

 private:
  std::string name_ = "<config>";
  std::map<std::string, Value> values_;
};

struct CampaignConfig {
  std::filesystem::path dictionary;
  std::optional<std::filesystem::path> overlay;
  std::filesystem::path gold;       // corpus TSV; the first pool_size pairs seed the pool
  std::filesystem::path sentences;  // plain text, one Chinese sentence per line
  std::filesystem::path out_dir = "out";
  std::string schedule = "canonical";  // or "uniform"

  std::string provider = "mock";  // or "http"
  MockNoise noise;
  uint64_t mock_seed = 0;
  HttpProviderConfig http;

  PipelineConfig pipeline;
  uint64_t sample_seed = 0;

  /// Reads a config file. Relative paths resolve against the file's
  /// directory; every referenced input path must exist.
  static CampaignConfig from_file(const ConfigFile& file, const std::filesystem::path& base_dir);
  /// Fully resolved settings in config syntax.
  ConfigFile resolved() const;
};

}  // namespace nushu
