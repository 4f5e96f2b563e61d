#include "oblab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oblab {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
} // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config c;
  c.name_ = name;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": unterminated section");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.kv_.count(full))
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": duplicate key " + full);
    c.kv_[full] = val;
    c.line_of_[full] = lineno;
  }
  return c;
}

void Config::fail(const std::string& key, const std::string& what) const {
  const auto it = line_of_.find(key);
  const std::string loc =
      it == line_of_.end() ? name_ : name_ + ":" + std::to_string(it->second);
  throw std::runtime_error(loc + ": " + what + " (key " + key + ")");
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) fail(key, "missing required key");
  touched_[key] = true;
  return it->second;
}

std::string Config::get_string_or(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  touched_[key] = true;
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    fail(key, "expected a real number, got '" + v + "'");
  }
}

double Config::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    fail(key, "expected an integer, got '" + v + "'");
  }
}

int Config::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

void Config::check_all_touched() const {
  for (const auto& [key, val] : kv_)
    if (!touched_.count(key)) fail(key, "unknown key");
}

} // namespace oblab
