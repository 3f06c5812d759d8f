#pragma once

// Flat key=value configuration with dotted section prefixes and a small
// field expression language:
//
//   grid.n = 256
//   spec.g0 = const:1.0 + cos:1:0.1
//   spec.v0 = sin:2:-0.05
//
// Field terms are const:VALUE, sin:MODE:AMP and cos:MODE:AMP, joined by '+'
// (whitespace around separators is ignored; '0' alone denotes the zero
// field). Unknown or malformed entries raise ConfigError naming the key.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scl/errors.hpp"
#include "scl/field.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline ConfigMap parse_config(std::istream& in, const std::string& origin = "<config>") {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    out[key] = val;
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

inline std::string config_text(const ConfigMap& m) {
  std::ostringstream os;
  for (const auto& [k, v] : m) os << k << " = " << v << '\n';
  return os.str();
}

inline bool has_key(const ConfigMap& m, const std::string& key) { return m.count(key) > 0; }

inline std::string get_string(const ConfigMap& m, const std::string& key, const std::string& def) {
  auto it = m.find(key);
  return it == m.end() ? def : it->second;
}

inline double get_double(const ConfigMap& m, const std::string& key, double def) {
  auto it = m.find(key);
  if (it == m.end()) return def;
  try {
    std::size_t pos;
    const double x = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(key + ": not a number: '" + it->second + "'");
  }
}

inline int get_int(const ConfigMap& m, const std::string& key, int def) {
  auto it = m.find(key);
  if (it == m.end()) return def;
  try {
    std::size_t pos;
    const long x = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return static_cast<int>(x);
  } catch (...) {
    throw ConfigError(key + ": not an integer: '" + it->second + "'");
  }
}

// A parsed field expression: optional constant plus a trigonometric
// polynomial part.
struct FieldExpr {
  double constant = 0.0;
  TrigPolynomial poly;
};

inline FieldExpr parse_field_expr(const std::string& text, const std::string& key) {
  FieldExpr e;
  const std::string t = trim(text);
  if (t.empty() || t == "0") return e;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw ConfigError(key + ": bad field expression '" + text + "' (" + why + ")");
  };
  while (pos < t.size()) {
    // Term separator: '+' that is not part of an exponent like 1e+3. A
    // leading sign of the first term belongs to its amplitude.
    std::size_t next = pos + 1;
    while (true) {
      next = t.find('+', next);
      if (next == std::string::npos) break;
      const char prev = t[next - 1];
      if (prev != 'e' && prev != 'E') break;
      ++next;
    }
    std::string term = trim(t.substr(pos, next == std::string::npos ? next : next - pos));
    pos = next == std::string::npos ? t.size() : next + 1;
    if (term.empty()) fail("empty term");
    std::vector<std::string> parts;
    std::size_t p = 0;
    while (true) {
      const std::size_t colon = term.find(':', p);
      parts.push_back(trim(term.substr(p, colon == std::string::npos ? colon : colon - p)));
      if (colon == std::string::npos) break;
      p = colon + 1;
    }
    auto num = [&](const std::string& s) {
      try {
        std::size_t q;
        const double x = std::stod(s, &q);
        if (q != s.size()) throw std::invalid_argument("");
        return x;
      } catch (...) {
        fail("not a number: '" + s + "'");
        return 0.0;
      }
    };
    auto mode = [&](const std::string& s) {
      const double x = num(s);
      const int k = static_cast<int>(x);
      if (k < 1 || k != x) fail("mode must be a positive integer: '" + s + "'");
      return k;
    };
    if (parts[0] == "const") {
      if (parts.size() != 2) fail("const takes one value");
      e.constant += num(parts[1]);
    } else if (parts[0] == "sin") {
      if (parts.size() != 3) fail("sin takes mode and amplitude");
      e.poly.add_sin(mode(parts[1]), num(parts[2]));
    } else if (parts[0] == "cos") {
      if (parts.size() != 3) fail("cos takes mode and amplitude");
      e.poly.add_cos(mode(parts[1]), num(parts[2]));
    } else {
      fail("unknown term '" + parts[0] + "'");
    }
  }
  return e;
}

inline PeriodicField field_from_config(const ConfigMap& m, const std::string& key, int grid_n,
                                       const std::string& def = "0") {
  const FieldExpr e = parse_field_expr(get_string(m, key, def), key);
  PeriodicField f = e.poly.to_field(grid_n);
  for (double& x : f.v) x += e.constant;
  return f;
}

}  // namespace scl
