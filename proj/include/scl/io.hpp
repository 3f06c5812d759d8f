#pragma once

// On-disk formats shared by the command line tools: RFC 4180 CSV for fields
// and control coefficients, JSON lines for per-step run logs, and content
// hashed run directories so repeated runs with identical configuration land
// in the same place.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scl/errors.hpp"
#include "scl/field.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

using json = nlohmann::ordered_json;

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open for writing: " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(cells[i]);
    }
    out_ << "\r\n";
  }

  void numeric_row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_double(cells[i]);
    }
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
};

// Grid fields as columns: x plus one named column per field.
inline void write_fields_csv(const std::filesystem::path& path,
                             const std::vector<std::string>& names,
                             const std::vector<const PeriodicField*>& fields) {
  if (names.empty() || names.size() != fields.size())
    throw std::invalid_argument("write_fields_csv: names and fields must match");
  const int n = fields.front()->n;
  std::vector<std::string> header{"x"};
  header.insert(header.end(), names.begin(), names.end());
  CsvWriter w(path, header);
  const PeriodicGrid grid(n);
  std::vector<double> row(names.size() + 1);
  for (int j = 0; j < n; ++j) {
    row[0] = grid.x(j);
    for (std::size_t c = 0; c < fields.size(); ++c) row[c + 1] = fields[c]->v[j];
    w.numeric_row(row);
  }
}

// Control curve as coefficient columns per component and mode.
inline void write_control_csv(const std::filesystem::path& path, const std::vector<double>& times,
                              const std::vector<TrigPair>& values) {
  int max_mode = 1;
  for (const auto& v : values) max_mode = std::max({max_mode, v.a.max_mode(), v.b.max_mode()});
  std::vector<std::string> header{"t"};
  for (const char* comp : {"eta0", "eta1"}) {
    for (int k = 1; k <= max_mode; ++k) {
      header.push_back(std::string(comp) + "_sin" + std::to_string(k));
      header.push_back(std::string(comp) + "_cos" + std::to_string(k));
    }
  }
  CsvWriter w(path, header);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::size_t c = 0;
    row[c++] = times[i];
    for (const TrigPolynomial* p : {&values[i].a, &values[i].b}) {
      for (int k = 1; k <= max_mode; ++k) {
        row[c++] = p->sin_coef(k);
        row[c++] = p->cos_coef(k);
      }
    }
    w.numeric_row(row);
  }
}

class JsonLinesLogger {
 public:
  explicit JsonLinesLogger(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open for writing: " + path.string());
  }
  void log(const json& j) { out_ << j.dump() << '\n'; }

 private:
  std::ofstream out_;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string short_hash(const std::string& s) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(s);
  return os.str().substr(0, 8);
}

// runs/<name>-<hash>/ with fields/ and controls/ beneath. The hash covers
// the configuration text, so the directory is stable across identical runs.
inline std::filesystem::path make_run_dir(const std::filesystem::path& base, const std::string& name,
                                          const std::string& config_text) {
  const std::filesystem::path dir = base / "runs" / (name + "-" + short_hash(config_text));
  std::filesystem::create_directories(dir / "fields");
  std::filesystem::create_directories(dir / "controls");
  std::ofstream cfg(dir / "config.txt", std::ios::binary);
  cfg << config_text;
  return dir;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace scl
