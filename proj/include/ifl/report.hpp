#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifl/error.hpp"
#include "ifl/repsim.hpp"

namespace ifl::io {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

/// Minimal CSV emitter; fields containing separators or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) { add_row(header); }

  void add_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) body_ += ',';
      body_ += escape(fields[i]);
    }
    body_ += '\n';
  }

  const std::string& str() const { return body_; }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << body_;
  }

 private:
  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  }

  std::string body_;
};

/// Split one CSV line; supports the quoting produced by CsvWriter.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

/// FNV-1a 64-bit content hash, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Two-color heatmap ramp: 0.0 -> #ffffff, 1.0 -> #08306b.
inline std::string heat_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 + v * (0x08 - 255.0)));
  const int g = static_cast<int>(std::lround(255.0 + v * (0x30 - 255.0)));
  const int b = static_cast<int>(std::lround(255.0 + v * (0x6b - 255.0)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

/// Deterministic SVG heatmap of a CKA grid: one rect per cell (class="cell"),
/// axis labels are layer indices, and the legend names the kernel placement.
inline std::string render_cka_svg(const repsim::CkaGrid& grid) {
  const std::size_t rows = grid.layers_a;
  const std::size_t cols = grid.layers_b;
  const int cell = 24;
  const int left = 48;
  const int top = 24;
  const int legend_h = 52;
  const int width = left + static_cast<int>(cols) * cell + 16;
  const int height = top + static_cast<int>(rows) * cell + legend_h;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const int x = left + static_cast<int>(j) * cell;
      const int y = top + static_cast<int>(i) * cell;
      svg += "<rect class=\"cell\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
             "\" fill=\"" + heat_color(grid.values(i, j)) + "\"><title>(" + std::to_string(i) +
             "," + std::to_string(j) + ") " + format_fixed(grid.values(i, j), 4) +
             "</title></rect>\n";
    }
  }
  for (std::size_t i = 0; i < rows; ++i)
    svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" +
           std::to_string(top + static_cast<int>(i) * cell + cell / 2 + 4) +
           "\" font-size=\"10\" text-anchor=\"end\">" + std::to_string(i) + "</text>\n";
  for (std::size_t j = 0; j < cols; ++j)
    svg += "<text x=\"" + std::to_string(left + static_cast<int>(j) * cell + cell / 2) +
           "\" y=\"" + std::to_string(top - 8) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + std::to_string(j) + "</text>\n";
  const int legend_y = top + static_cast<int>(rows) * cell + 18;
  svg += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(legend_y) +
         "\" font-size=\"11\">lower triangle + diagonal: linear CKA; upper triangle: RBF CKA"
         "</text>\n";
  svg += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(legend_y + 16) +
         "\" font-size=\"11\">scale: 0.0 = #ffffff, 1.0 = #08306b</text>\n";
  svg += "</svg>\n";
  return svg;
}

inline void emit_cka_svg(const repsim::CkaGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << render_cka_svg(grid);
}

inline CsvWriter cka_grid_csv(const repsim::CkaGrid& grid) {
  CsvWriter csv({"layer_a", "layer_b", "kernel", "value"});
  for (std::size_t i = 0; i < grid.layers_a; ++i)
    for (std::size_t j = 0; j < grid.layers_b; ++j)
      csv.add_row({std::to_string(i), std::to_string(j), i < j ? "rbf" : "linear",
                   format_double(grid.values(i, j))});
  return csv;
}

/// Run manifest: every input and output with a content hash, plus the seed
/// and parameters. Output names are relative to the run directory so two
/// runs into different directories stay byte-identical.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

  void add_parameter(const std::string& key, const std::string& value) {
    parameters_[key] = value;
  }

  void add_input(const std::string& path) {
    inputs_[path] = fnv1a_hex(read_file_bytes(path));
  }

  void add_output(const std::filesystem::path& dir, const std::string& name) {
    outputs_[name] = fnv1a_hex(read_file_bytes((dir / name).string()));
  }

  std::string write(const std::filesystem::path& dir) const {
    nlohmann::json j;
    j["command"] = command_;
    j["seed"] = seed_;
    j["hash_algorithm"] = "fnv1a-64";
    j["parameters"] = parameters_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    const std::filesystem::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    return path.string();
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  std::map<std::string, std::string> parameters_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

}  // namespace ifl::io
