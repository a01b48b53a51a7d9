#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifl/error.hpp"
#include "ifl/langid.hpp"

namespace ifl::io {

using langid::ResponseRecord;

namespace detail {

inline Error line_error(std::size_t line_no, const std::string& what) {
  return Error("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

/// Parse one JSONL response file. Every validation failure names the line
/// and the offending key; corrupted records never load silently.
inline std::vector<ResponseRecord> load_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  static const std::set<std::string> known_datasets = {"llavaw", "maxm", "visitazure", "multiq"};
  std::vector<ResponseRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw detail::line_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    auto require_string = [&](const char* key) -> std::string {
      if (!j.contains(key))
        throw detail::line_error(line_no, std::string("missing key '") + key + "'");
      if (!j[key].is_string())
        throw detail::line_error(line_no, std::string("key '") + key + "' must be a string");
      return j[key].get<std::string>();
    };
    ResponseRecord rec;
    rec.id = require_string("id");
    rec.model = require_string("model");
    rec.dataset = require_string("dataset");
    if (!known_datasets.count(rec.dataset))
      throw detail::line_error(line_no, "unknown dataset '" + rec.dataset + "'");
    try {
      rec.language = langid::language_from_iso2(require_string("language"));
      rec.condition = langid::condition_from_string(require_string("condition"));
    } catch (const Error& e) {
      throw detail::line_error(line_no, e.what());
    }
    rec.query = require_string("query");
    rec.completion = require_string("completion");
    rec.glotlid_label = require_string("glotlid_label");
    try {
      langid::RawLangLabel::parse(rec.glotlid_label);  // corrupted labels surface here
    } catch (const Error& e) {
      throw detail::line_error(line_no, e.what());
    }
    if (j.contains("gold_language")) {
      try {
        rec.gold_language = langid::language_from_string(j["gold_language"].get<std::string>());
      } catch (const std::exception& e) {
        throw detail::line_error(line_no, std::string("key 'gold_language': ") + e.what());
      }
    }
    if (j.contains("expert_fidelity")) {
      const auto& v = j["expert_fidelity"];
      if (v.is_string() && v.get<std::string>() == "NA") {
        rec.expert_na = true;
      } else if (v.is_number_integer() &&
                 (v.get<int>() == 0 || v.get<int>() == 1)) {
        rec.expert_fidelity = v.get<int>();
      } else {
        throw detail::line_error(line_no, "key 'expert_fidelity' must be 0, 1 or \"NA\"");
      }
    }
    if (j.contains("inclusion_prob")) {
      if (!j["inclusion_prob"].is_number())
        throw detail::line_error(line_no, "key 'inclusion_prob' must be a number");
      const double p = j["inclusion_prob"].get<double>();
      if (!(p > 0.0 && p <= 1.0))
        throw detail::line_error(line_no, "key 'inclusion_prob' must lie in (0,1]");
      rec.inclusion_prob = p;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string iso2_from_language(langid::CanonicalLanguage lang) {
  using CL = langid::CanonicalLanguage;
  switch (lang) {
    case CL::chinese: return "zh";
    case CL::japanese: return "ja";
    case CL::hindi: return "hi";
    case CL::bengali: return "bn";
    case CL::hebrew: return "he";
    case CL::thai: return "th";
    case CL::russian: return "ru";
    case CL::urdu: return "ur";
    case CL::arabic: return "ar";
    case CL::german: return "de";
    case CL::english: return "en";
    case CL::spanish: return "es";
    case CL::romanian: return "ro";
    case CL::french: return "fr";
    default: throw Error("language has no two-letter code");
  }
}

/// Serialize records back to JSONL; the inverse of load_responses.
inline void write_responses(const std::vector<ResponseRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["model"] = rec.model;
    j["dataset"] = rec.dataset;
    j["language"] = iso2_from_language(rec.language);
    j["condition"] = langid::to_string(rec.condition);
    j["query"] = rec.query;
    j["completion"] = rec.completion;
    j["glotlid_label"] = rec.glotlid_label;
    if (rec.gold_language) j["gold_language"] = langid::to_string(*rec.gold_language);
    if (rec.expert_na)
      j["expert_fidelity"] = "NA";
    else if (rec.expert_fidelity)
      j["expert_fidelity"] = *rec.expert_fidelity;
    if (rec.inclusion_prob) j["inclusion_prob"] = *rec.inclusion_prob;
    out << j.dump() << '\n';
  }
}

}  // namespace ifl::io
