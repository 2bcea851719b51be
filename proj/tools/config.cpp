#include "config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "efk/errors.hpp"
#include "efk/io.hpp"

namespace efk::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(Errc::Config, "'" + key + "': " + what);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

double parse_number(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t.rfind("sqrt(", 0) == 0 && t.size() > 6 && t.back() == ')') {
    const double inner = parse_number(t.substr(5, t.size() - 6), key);
    if (!(inner >= 0)) bad(key, "sqrt of a negative number");
    return std::sqrt(inner);
  }
  double v = 0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) bad(key, "not a number: '" + t + "'");
  return v;
}

Config Config::parse(const std::string& text, std::filesystem::path base_dir) {
  Config c;
  c.base_ = std::move(base_dir);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::Config, "line " + std::to_string(lineno) + ": empty key");
    if (c.raw(key)) bad(key, "given twice");
    c.entries_.emplace_back(std::move(key), std::move(value));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::Config, e.what());
  }
  return parse(text, path.parent_path());
}

void Config::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : entries_) {
    if (!allowed.count(k)) bad(k, "unknown key for this command");
  }
}

const std::string* Config::raw(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool Config::has(const std::string& key) const { return raw(key) != nullptr; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = raw(key);
  return v ? *v : fallback;
}

std::string Config::require_string(const std::string& key) const {
  const auto* v = raw(key);
  if (!v) bad(key, "required");
  return *v;
}

double Config::get_number(const std::string& key, double fallback) const {
  const auto* v = raw(key);
  return v ? parse_number(*v, key) : fallback;
}

double Config::require_number(const std::string& key) const { return parse_number(require_string(key), key); }

std::optional<double> Config::find_number(const std::string& key) const {
  const auto* v = raw(key);
  if (!v) return std::nullopt;
  return parse_number(*v, key);
}

std::size_t Config::get_count(const std::string& key, std::size_t fallback) const {
  const auto* v = raw(key);
  if (!v) return fallback;
  std::size_t n = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), n);
  if (v->empty() || res.ec != std::errc{} || res.ptr != v->data() + v->size()) bad(key, "not a count: '" + *v + "'");
  return n;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  const auto* v = raw(key);
  if (!v) return fallback;
  std::uint64_t n = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), n);
  if (v->empty() || res.ec != std::errc{} || res.ptr != v->data() + v->size()) bad(key, "not a seed: '" + *v + "'");
  return n;
}

std::vector<double> Config::get_numbers(const std::string& key) const {
  std::vector<double> out;
  if (const auto* v = raw(key)) {
    for (const auto& item : split_list(*v)) out.push_back(parse_number(item, key));
  }
  return out;
}

std::vector<std::size_t> Config::get_counts(const std::string& key) const {
  std::vector<std::size_t> out;
  if (const auto* v = raw(key)) {
    for (const auto& item : split_list(*v)) {
      std::size_t n = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), n);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) bad(key, "not a count: '" + item + "'");
      out.push_back(n);
    }
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  const auto* v = raw(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

std::filesystem::path Config::get_path(const std::string& key) const {
  const std::filesystem::path p = require_string(key);
  return p.is_absolute() || base_.empty() ? p : base_ / p;
}

}  // namespace efk::cli
