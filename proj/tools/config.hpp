#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace efk::cli {

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
/// Numbers may be written as sqrt(x); lists are comma separated.
class Config {
 public:
  static Config parse(const std::string& text, std::filesystem::path base_dir = {});
  static Config load(const std::filesystem::path& path);

  /// Throws Config errors naming any key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  double require_number(const std::string& key) const;
  std::optional<double> find_number(const std::string& key) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_numbers(const std::string& key) const;
  std::vector<std::size_t> get_counts(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  /// Path value resolved against the config file's directory.
  std::filesystem::path get_path(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  const std::string* raw(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
  std::filesystem::path base_;
};

/// Parses a number, `sqrt(x)`, `inf` or `-inf`.
double parse_number(const std::string& text, const std::string& key);

}  // namespace efk::cli
