#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace swsgd {

/// Plain-text configuration document: `[section]` headers, `key = value`
/// lines, `#` comments. Keys are addressed as "section.key". Later
/// assignments overwrite earlier ones, which is how command-line overrides
/// are layered on top of a file.
class Document {
 public:
  static Document parse(const std::string& text);
  static Document load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  void erase(const std::string& key);

  std::optional<std::string> find(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<long long> get_ints(const std::string& key, std::vector<long long> fallback) const;

  /// Required variants throw std::invalid_argument naming the key.
  std::string require_string(const std::string& key) const;

  /// Canonical rendering: sections in lexicographic order, keys sorted.
  std::string render() const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// 17-significant-digit rendering; parses back to the identical double.
std::string format_double(double v);
std::string join_doubles(const std::vector<double>& values);

}  // namespace swsgd
