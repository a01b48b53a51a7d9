#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifl/error.hpp"

namespace ifl::langid {

/// Closed set of postprocessed language labels. `none` marks unidentifiable
/// output, `other_latin` any Latin-script language outside the named five,
/// `other` any script outside the handled set.
enum class CanonicalLanguage {
  chinese,
  japanese,
  hindi,
  bengali,
  hebrew,
  thai,
  russian,
  none,
  urdu,
  arabic,
  german,
  english,
  spanish,
  romanian,
  french,
  other_latin,
  other,
};

inline const char* to_string(CanonicalLanguage lang) {
  switch (lang) {
    case CanonicalLanguage::chinese: return "chinese";
    case CanonicalLanguage::japanese: return "japanese";
    case CanonicalLanguage::hindi: return "hindi";
    case CanonicalLanguage::bengali: return "bengali";
    case CanonicalLanguage::hebrew: return "hebrew";
    case CanonicalLanguage::thai: return "thai";
    case CanonicalLanguage::russian: return "russian";
    case CanonicalLanguage::none: return "none";
    case CanonicalLanguage::urdu: return "urdu";
    case CanonicalLanguage::arabic: return "arabic";
    case CanonicalLanguage::german: return "german";
    case CanonicalLanguage::english: return "english";
    case CanonicalLanguage::spanish: return "spanish";
    case CanonicalLanguage::romanian: return "romanian";
    case CanonicalLanguage::french: return "french";
    case CanonicalLanguage::other_latin: return "other_latin";
    case CanonicalLanguage::other: return "other";
  }
  return "other";
}

inline CanonicalLanguage language_from_string(std::string_view name) {
  static const std::map<std::string_view, CanonicalLanguage> table = {
      {"chinese", CanonicalLanguage::chinese},
      {"japanese", CanonicalLanguage::japanese},
      {"hindi", CanonicalLanguage::hindi},
      {"bengali", CanonicalLanguage::bengali},
      {"hebrew", CanonicalLanguage::hebrew},
      {"thai", CanonicalLanguage::thai},
      {"russian", CanonicalLanguage::russian},
      {"none", CanonicalLanguage::none},
      {"urdu", CanonicalLanguage::urdu},
      {"arabic", CanonicalLanguage::arabic},
      {"german", CanonicalLanguage::german},
      {"english", CanonicalLanguage::english},
      {"spanish", CanonicalLanguage::spanish},
      {"romanian", CanonicalLanguage::romanian},
      {"french", CanonicalLanguage::french},
      {"other_latin", CanonicalLanguage::other_latin},
      {"other", CanonicalLanguage::other},
  };
  auto it = table.find(name);
  if (it == table.end()) throw Error("unknown canonical language: " + std::string(name));
  return it->second;
}

/// Two-letter ISO 639 query-language codes accepted in response files.
inline CanonicalLanguage language_from_iso2(std::string_view code) {
  static const std::map<std::string_view, CanonicalLanguage> table = {
      {"zh", CanonicalLanguage::chinese},  {"ja", CanonicalLanguage::japanese},
      {"hi", CanonicalLanguage::hindi},    {"bn", CanonicalLanguage::bengali},
      {"he", CanonicalLanguage::hebrew},   {"th", CanonicalLanguage::thai},
      {"ru", CanonicalLanguage::russian},  {"ur", CanonicalLanguage::urdu},
      {"ar", CanonicalLanguage::arabic},   {"de", CanonicalLanguage::german},
      {"en", CanonicalLanguage::english},  {"es", CanonicalLanguage::spanish},
      {"ro", CanonicalLanguage::romanian}, {"fr", CanonicalLanguage::french},
  };
  auto it = table.find(code);
  if (it == table.end()) throw Error("unknown language code: " + std::string(code));
  return it->second;
}

/// True for languages a query can actually be written in.
inline bool is_concrete(CanonicalLanguage lang) {
  return lang != CanonicalLanguage::none && lang != CanonicalLanguage::other &&
         lang != CanonicalLanguage::other_latin;
}

/// A raw identifier label of the form "iso_Script" (3-letter lowercase code,
/// 4-letter script with leading capital), e.g. "deu_Latn".
struct RawLangLabel {
  std::string iso;
  std::string script;

  static RawLangLabel parse(std::string_view raw) {
    const auto underscore = raw.find('_');
    if (underscore == std::string_view::npos || raw.find('_', underscore + 1) != std::string_view::npos)
      throw Error("malformed language label: " + std::string(raw));
    RawLangLabel label;
    label.iso = std::string(raw.substr(0, underscore));
    label.script = std::string(raw.substr(underscore + 1));
    auto lower_alpha = [](const std::string& s) {
      return std::all_of(s.begin(), s.end(),
                         [](unsigned char c) { return std::islower(c) && std::isalpha(c); });
    };
    const bool iso_ok = label.iso.size() == 3 && lower_alpha(label.iso);
    const bool script_ok =
        label.script.size() == 4 && std::isupper(static_cast<unsigned char>(label.script[0])) &&
        lower_alpha(label.script.substr(1));
    if (!iso_ok || !script_ok) throw Error("malformed language label: " + std::string(raw));
    return label;
  }
};

/// Collapse a raw label into the canonical set. Scripts pin most languages;
/// Arabic script splits on Urdu, Latin script on the five named languages.
inline CanonicalLanguage parse_label(const RawLangLabel& raw) {
  const std::string& script = raw.script;
  if (script == "Hani") return CanonicalLanguage::chinese;
  if (script == "Jpan") return CanonicalLanguage::japanese;
  if (script == "Deva") return CanonicalLanguage::hindi;
  if (script == "Beng") return CanonicalLanguage::bengali;
  if (script == "Hebr") return CanonicalLanguage::hebrew;
  if (script == "Thai") return CanonicalLanguage::thai;
  if (script == "Cyrl") return CanonicalLanguage::russian;
  if (script == "Zzzz") return CanonicalLanguage::none;
  if (script == "Arab")
    return raw.iso == "urd" ? CanonicalLanguage::urdu : CanonicalLanguage::arabic;
  if (script == "Latn") {
    if (raw.iso == "deu") return CanonicalLanguage::german;
    if (raw.iso == "eng") return CanonicalLanguage::english;
    if (raw.iso == "spa") return CanonicalLanguage::spanish;
    if (raw.iso == "ron") return CanonicalLanguage::romanian;
    if (raw.iso == "fra") return CanonicalLanguage::french;
    return CanonicalLanguage::other_latin;
  }
  return CanonicalLanguage::other;
}

inline CanonicalLanguage parse_label(std::string_view raw) {
  return parse_label(RawLangLabel::parse(raw));
}

/// Binary response-fidelity score.
struct FidelityScore {
  int value = 0;
};

/// 1 iff the response language equals the query language. Querying in a
/// non-concrete language is a pipeline misconfiguration and fails loudly.
inline FidelityScore score_fidelity(CanonicalLanguage query_lang,
                                    CanonicalLanguage response_lang) {
  if (!is_concrete(query_lang))
    throw Error("query language must be a concrete language");
  return FidelityScore{query_lang == response_lang ? 1 : 0};
}

enum class Condition { image, text };

inline const char* to_string(Condition c) { return c == Condition::image ? "image" : "text"; }

inline Condition condition_from_string(std::string_view s) {
  if (s == "image") return Condition::image;
  if (s == "text") return Condition::text;
  throw Error("unknown condition: " + std::string(s));
}

/// One model completion with its evaluation metadata.
struct ResponseRecord {
  std::string id;
  std::string model;
  std::string dataset;  // llavaw | maxm | visitazure | multiq
  CanonicalLanguage language = CanonicalLanguage::english;  // query language
  Condition condition = Condition::text;
  std::string query;
  std::string completion;
  std::string glotlid_label;  // raw "iso_Script"
  std::optional<CanonicalLanguage> gold_language;
  std::optional<int> expert_fidelity;  // 0/1; absent if unannotated or NA
  bool expert_na = false;              // annotator saw incoherent output
  std::optional<double> inclusion_prob;
  std::optional<double> proxy_fidelity;  // filled by score_records
};

/// Parse each record's raw label and score it against the query language.
inline void score_records(std::vector<ResponseRecord>& records) {
  for (auto& rec : records) {
    const CanonicalLanguage response_lang = parse_label(rec.glotlid_label);
    rec.proxy_fidelity = static_cast<double>(score_fidelity(rec.language, response_lang).value);
  }
}

enum class GroupKey { model, dataset, language, condition };

inline const char* to_string(GroupKey key) {
  switch (key) {
    case GroupKey::model: return "model";
    case GroupKey::dataset: return "dataset";
    case GroupKey::language: return "language";
    case GroupKey::condition: return "condition";
  }
  return "model";
}

inline GroupKey group_key_from_string(std::string_view s) {
  if (s == "model") return GroupKey::model;
  if (s == "dataset") return GroupKey::dataset;
  if (s == "language") return GroupKey::language;
  if (s == "condition") return GroupKey::condition;
  throw Error("unknown group key: " + std::string(s));
}

struct FidelitySummaryRow {
  std::vector<std::string> group;  // values aligned with the requested keys
  std::size_t count = 0;
  double mean_fidelity = 0.0;
};

inline std::string group_value(const ResponseRecord& rec, GroupKey key) {
  switch (key) {
    case GroupKey::model: return rec.model;
    case GroupKey::dataset: return rec.dataset;
    case GroupKey::language: return to_string(rec.language);
    case GroupKey::condition: return to_string(rec.condition);
  }
  return {};
}

/// Mean proxy fidelity per group, rows sorted by group key. Groups with no
/// records simply do not appear; an empty input gives an empty table.
inline std::vector<FidelitySummaryRow> summarize_fidelity(
    const std::vector<ResponseRecord>& records, const std::vector<GroupKey>& group_by) {
  std::map<std::vector<std::string>, std::pair<std::size_t, double>> acc;
  for (const auto& rec : records) {
    if (!rec.proxy_fidelity)
      throw Error("record " + rec.id + " has no proxy fidelity score");
    std::vector<std::string> key;
    key.reserve(group_by.size());
    for (GroupKey k : group_by) key.push_back(group_value(rec, k));
    auto& slot = acc[key];
    slot.first += 1;
    slot.second += *rec.proxy_fidelity;
  }
  std::vector<FidelitySummaryRow> rows;
  rows.reserve(acc.size());
  for (const auto& [key, slot] : acc)
    rows.push_back({key, slot.first, slot.second / static_cast<double>(slot.first)});
  return rows;
}

}  // namespace ifl::langid
