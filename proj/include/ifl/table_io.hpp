#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ifl/design.hpp"
#include "ifl/error.hpp"
#include "ifl/langid.hpp"
#include "ifl/report.hpp"

namespace ifl::io {

namespace detail {

inline double parse_double(const std::string& s, std::size_t line_no, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("line " + std::to_string(line_no) + ": column '" + col +
                "' is not a number: " + s);
  }
}

inline std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  return idx;
}

}  // namespace detail

/// Load an intervention table: CSV with columns dataset, language (two-letter
/// code), ifl, ifl_remedied, and optionally the independently reported diff.
inline std::vector<design::InterventionRow> load_intervention_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  const auto header = split_csv_line(line);
  const auto idx = detail::header_index(header);
  for (const char* col : {"dataset", "language", "ifl", "ifl_remedied"})
    if (!idx.count(col)) throw Error(path + ": missing column '" + std::string(col) + "'");
  const bool has_diff = idx.count("diff") > 0;

  std::vector<design::InterventionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error("line " + std::to_string(line_no) + ": field count mismatch");
    design::InterventionRow row;
    row.dataset = fields[idx.at("dataset")];
    row.language = langid::language_from_iso2(fields[idx.at("language")]);
    row.ifl = detail::parse_double(fields[idx.at("ifl")], line_no, "ifl");
    row.ifl_remedied =
        detail::parse_double(fields[idx.at("ifl_remedied")], line_no, "ifl_remedied");
    if (std::abs(row.ifl) > 1.0 || std::abs(row.ifl_remedied) > 1.0)
      throw Error("line " + std::to_string(line_no) + ": effects must lie in [-1, 1]");
    if (has_diff) row.diff = detail::parse_double(fields[idx.at("diff")], line_no, "diff");
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Load design-effect observations: CSV with columns fidelity, image,
/// lang_model_alt, vision_alt, data_lang_alt (indicators as 0/1).
inline std::vector<design::DesignRow> load_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  const auto header = split_csv_line(line);
  const auto idx = detail::header_index(header);
  for (const char* col : {"fidelity", "image", "lang_model_alt", "vision_alt", "data_lang_alt"})
    if (!idx.count(col)) throw Error(path + ": missing column '" + std::string(col) + "'");

  auto parse_indicator = [](double v, std::size_t line_no, const char* col) {
    if (v != 0.0 && v != 1.0)
      throw Error("line " + std::to_string(line_no) + ": column '" + std::string(col) +
                  "' must be 0 or 1");
    return v == 1.0;
  };

  std::vector<design::DesignRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error("line " + std::to_string(line_no) + ": field count mismatch");
    design::DesignRow row;
    row.fidelity = detail::parse_double(fields[idx.at("fidelity")], line_no, "fidelity");
    row.image = parse_indicator(detail::parse_double(fields[idx.at("image")], line_no, "image"),
                                line_no, "image");
    row.lang_model_alt = parse_indicator(
        detail::parse_double(fields[idx.at("lang_model_alt")], line_no, "lang_model_alt"),
        line_no, "lang_model_alt");
    row.vision_alt = parse_indicator(
        detail::parse_double(fields[idx.at("vision_alt")], line_no, "vision_alt"), line_no,
        "vision_alt");
    row.data_lang_alt = parse_indicator(
        detail::parse_double(fields[idx.at("data_lang_alt")], line_no, "data_lang_alt"),
        line_no, "data_lang_alt");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ifl::io
