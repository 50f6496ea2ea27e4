#include <charconv>
#include <cmath>
#include <sstream>

#include "prefdens/error.hpp"
#include "prefdens/expctl.hpp"
#include "prefdens/io.hpp"

namespace prefdens::expctl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': expected a real number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

// Canonical text for a value of the given type; throws on malformed input.
std::string canonical(const ParamDef& d, const std::string& text) {
  switch (d.type) {
    case ParamType::kInt:
      return std::to_string(parse_int(d.key, text));
    case ParamType::kReal:
      return fmt_double(parse_real(d.key, text));
    case ParamType::kBool: {
      const std::string t = trim(text);
      if (t == "true" || t == "1") return "true";
      if (t == "false" || t == "0") return "false";
      throw ConfigError("config key '" + d.key + "': expected true/false, got '" + text + "'");
    }
    case ParamType::kString:
      return trim(text);
    case ParamType::kRealList: {
      std::string out;
      for (const auto& part : split(text, ',')) {
        if (!out.empty()) out += ",";
        out += fmt_double(parse_real(d.key, part));
      }
      if (out.empty()) throw ConfigError("config key '" + d.key + "': empty list");
      return out;
    }
  }
  throw ConfigError("unknown parameter type");
}

}  // namespace

Config::Config(Schema schema) : schema_(std::move(schema)) {
  for (const auto& d : schema_) {
    if (values_.count(d.key)) throw ConfigError("duplicate schema key " + d.key);
    values_[d.key] = canonical(d, d.default_value);
  }
}

const ParamDef& Config::def(const std::string& key) const {
  for (const auto& d : schema_)
    if (d.key == key) return d;
  throw ConfigError("unknown config key '" + key + "'");
}

void Config::set(const std::string& key, const std::string& value) {
  const ParamDef& d = def(trim(key));
  values_[d.key] = canonical(d, value);
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

long long Config::get_int(const std::string& key) const {
  if (def(key).type != ParamType::kInt) throw ConfigError("config key '" + key + "' is not an integer");
  return parse_int(key, values_.at(key));
}

double Config::get_real(const std::string& key) const {
  if (def(key).type != ParamType::kReal) throw ConfigError("config key '" + key + "' is not a real");
  return parse_real(key, values_.at(key));
}

bool Config::get_bool(const std::string& key) const {
  if (def(key).type != ParamType::kBool) throw ConfigError("config key '" + key + "' is not a bool");
  return values_.at(key) == "true";
}

std::string Config::get_string(const std::string& key) const {
  if (def(key).type != ParamType::kString) throw ConfigError("config key '" + key + "' is not a string");
  return values_.at(key);
}

std::vector<double> Config::get_reals(const std::string& key) const {
  if (def(key).type != ParamType::kRealList) throw ConfigError("config key '" + key + "' is not a list");
  std::vector<double> out;
  for (const auto& part : split(values_.at(key), ',')) out.push_back(parse_real(key, part));
  return out;
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& d : schema_) out += d.key + " = " + values_.at(d.key) + "\n";
  return out;
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : schema_) {
    switch (d.type) {
      case ParamType::kInt: j[d.key] = get_int(d.key); break;
      case ParamType::kReal: j[d.key] = get_real(d.key); break;
      case ParamType::kBool: j[d.key] = get_bool(d.key); break;
      case ParamType::kString: j[d.key] = get_string(d.key); break;
      case ParamType::kRealList: j[d.key] = get_reals(d.key); break;
    }
  }
  return j;
}

}  // namespace prefdens::expctl
