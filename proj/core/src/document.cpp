#include "swsgd/document.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swsgd {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + text +
                                "'");
  }
  return v;
}

}  // namespace

Document Document::parse(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    doc.set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
  }
  return doc;
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void Document::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool Document::has(const std::string& key) const { return entries_.count(key) != 0; }

void Document::erase(const std::string& key) { entries_.erase(key); }

std::optional<std::string> Document::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Document::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double Document::get_double(const std::string& key, double fallback) const {
  auto v = find(key);
  return v ? to_double(key, *v) : fallback;
}

long long Document::get_int(const std::string& key, long long fallback) const {
  auto v = find(key);
  return v ? to_int(key, *v) : fallback;
}

bool Document::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> Document::get_doubles(const std::string& key,
                                          std::vector<double> fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& tok : split_list(*v)) out.push_back(to_double(key, tok));
  return out;
}

std::vector<long long> Document::get_ints(const std::string& key,
                                          std::vector<long long> fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<long long> out;
  for (const auto& tok : split_list(*v)) out.push_back(to_int(key, tok));
  return out;
}

std::string Document::require_string(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty()) throw std::invalid_argument("config key '" + key + "' is required");
  return *v;
}

std::string Document::render() const {
  std::ostringstream out;
  // Unsectioned keys first, so they are not read back into a section.
  for (const auto& [full, value] : entries_) {
    if (full.find('.') == std::string::npos) out << full << " = " << value << '\n';
  }
  std::string current;
  for (const auto& [full, value] : entries_) {
    const auto dot = full.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = full.substr(0, dot);
    if (section != current) {
      if (out.tellp() > 0) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << full.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace swsgd
