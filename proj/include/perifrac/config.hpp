#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

// Strict INI configuration: [section] headers, key = value pairs, # or ;
// comments. Parsing and typed access collect every problem instead of
// stopping at the first, so a bad file reports all its defects in one run;
// keys are marked as consumed so leftovers can be flagged as unknown.

namespace perifrac {

class Config {
 public:
  Config() = default;

  static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    cfg.origin_ = origin;
    cfg.raw_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) {
          cfg.fail(lineno, "malformed section header '" + t + "'");
          continue;
        }
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty()) cfg.fail(lineno, "empty section name");
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos) {
        cfg.fail(lineno, "expected key = value, got '" + t + "'");
        continue;
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty()) {
        cfg.fail(lineno, "empty key");
        continue;
      }
      if (section.empty()) {
        cfg.fail(lineno, "key '" + key + "' appears before any [section]");
        continue;
      }
      auto& sec = cfg.data_[section];
      if (sec.count(key)) {
        cfg.fail(lineno, "duplicate key '" + section + "." + key + "'");
        continue;
      }
      sec[key] = Entry{val, lineno, false};
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      Config cfg;
      cfg.origin_ = path;
      cfg.errors_.push_back(path + ": cannot open file");
      return cfg;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
  }

  const std::string& raw_text() const { return raw_; }
  const std::string& origin() const { return origin_; }
  bool has(const std::string& sec, const std::string& key) const {
    auto s = data_.find(sec);
    return s != data_.end() && s->second.count(key) > 0;
  }

  std::string get_string(const std::string& sec, const std::string& key, const std::string& def) {
    const Entry* e = touch(sec, key);
    return e ? e->value : def;
  }

  std::string require_string(const std::string& sec, const std::string& key) {
    const Entry* e = touch(sec, key);
    if (!e) {
      missing(sec, key);
      return {};
    }
    return e->value;
  }

  double get_double(const std::string& sec, const std::string& key, double def) {
    const Entry* e = touch(sec, key);
    return e ? parse_double(sec, key, *e, def) : def;
  }

  double require_double(const std::string& sec, const std::string& key) {
    const Entry* e = touch(sec, key);
    if (!e) {
      missing(sec, key);
      return 0.0;
    }
    return parse_double(sec, key, *e, 0.0);
  }

  long get_long(const std::string& sec, const std::string& key, long def) {
    const Entry* e = touch(sec, key);
    if (!e) return def;
    char* end = nullptr;
    const long v = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0') {
      fail(e->line, "value of " + sec + "." + key + " is not an integer: '" + e->value + "'");
      return def;
    }
    return v;
  }

  bool get_bool(const std::string& sec, const std::string& key, bool def) {
    const Entry* e = touch(sec, key);
    if (!e) return def;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    fail(e->line, "value of " + sec + "." + key + " is not a boolean: '" + e->value + "'");
    return def;
  }

  std::vector<double> get_double_list(const std::string& sec, const std::string& key, std::vector<double> def = {}) {
    const Entry* e = touch(sec, key);
    if (!e) return def;
    std::vector<double> out;
    std::string item;
    std::istringstream in(normalize_separators(e->value));
    while (in >> item) {
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') {
        fail(e->line, "element of " + sec + "." + key + " is not a number: '" + item + "'");
        return def;
      }
      out.push_back(v);
    }
    if (out.empty()) fail(e->line, sec + "." + key + " is an empty list");
    return out;
  }

  std::vector<long> get_long_list(const std::string& sec, const std::string& key, std::vector<long> def = {}) {
    const Entry* e = touch(sec, key);
    if (!e) return def;
    std::vector<long> out;
    std::string item;
    std::istringstream in(normalize_separators(e->value));
    while (in >> item) {
      char* end = nullptr;
      const long v = std::strtol(item.c_str(), &end, 10);
      if (end == item.c_str() || *end != '\0') {
        fail(e->line, "element of " + sec + "." + key + " is not an integer: '" + item + "'");
        return def;
      }
      out.push_back(v);
    }
    if (out.empty()) fail(e->line, sec + "." + key + " is an empty list");
    return out;
  }

  std::vector<double> require_double_list(const std::string& sec, const std::string& key) {
    if (!has(sec, key)) {
      missing(sec, key);
      return {};
    }
    return get_double_list(sec, key);
  }

  void record_error(const std::string& message) { errors_.push_back(origin_ + ": " + message); }

  // Flags every key never read by a getter; call after all consumers ran.
  void finalize() {
    for (const auto& sec : data_)
      for (const auto& kv : sec.second)
        if (!kv.second.consumed)
          fail(kv.second.line, "unknown key '" + sec.first + "." + kv.first + "'");
  }

  const std::vector<std::string>& errors() const { return errors_; }
  bool ok() const { return errors_.empty(); }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };

  static std::string strip_comment(const std::string& s) {
    const std::size_t h = s.find_first_of("#;");
    return h == std::string::npos ? s : s.substr(0, h);
  }

  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static std::string normalize_separators(const std::string& s) {
    std::string out = s;
    for (char& c : out)
      if (c == ',') c = ' ';
    return out;
  }

  const Entry* touch(const std::string& sec, const std::string& key) {
    auto s = data_.find(sec);
    if (s == data_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.consumed = true;
    return &k->second;
  }

  double parse_double(const std::string& sec, const std::string& key, const Entry& e, double def) {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0') {
      fail(e.line, "value of " + sec + "." + key + " is not a number: '" + e.value + "'");
      return def;
    }
    return v;
  }

  void fail(int line, const std::string& msg) { errors_.push_back(origin_ + ":" + std::to_string(line) + ": " + msg); }
  void missing(const std::string& sec, const std::string& key) {
    errors_.push_back(origin_ + ": missing required key '" + sec + "." + key + "'");
  }

  std::map<std::string, std::map<std::string, Entry>> data_;
  std::vector<std::string> errors_;
  std::string origin_;
  std::string raw_;
};

}
