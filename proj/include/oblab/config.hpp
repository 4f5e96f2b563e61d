#pragma once

#include <map>
#include <optional>
#include <string>

namespace oblab {

// Flat key=value configuration with [section] headers and # comments.
// Lookup keys are "section.key"; parse and type errors carry the line.
class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name = "<config>");

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int fallback) const;

  // keys never read back, for strict validation of experiment configs
  std::map<std::string, bool>& touched() const { return touched_; }
  void check_all_touched() const;

private:
  std::string name_;
  std::map<std::string, std::string> kv_;
  std::map<std::string, int> line_of_;
  mutable std::map<std::string, bool> touched_;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

} // namespace oblab
