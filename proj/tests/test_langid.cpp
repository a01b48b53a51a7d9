#include <catch2/catch_amalgamated.hpp>

#include "ifl/langid.hpp"
#include "ifl/rng.hpp"
#include "oracles.hpp"

using namespace ifl::langid;

TEST_CASE("parse_label covers every branch of the collapsing rule") {
  const std::vector<std::pair<std::string, CanonicalLanguage>> table = {
      {"cmn_Hani", CanonicalLanguage::chinese},
      {"jpn_Jpan", CanonicalLanguage::japanese},
      {"hin_Deva", CanonicalLanguage::hindi},
      {"ben_Beng", CanonicalLanguage::bengali},
      {"heb_Hebr", CanonicalLanguage::hebrew},
      {"tha_Thai", CanonicalLanguage::thai},
      {"rus_Cyrl", CanonicalLanguage::russian},
      {"xxx_Zzzz", CanonicalLanguage::none},
      {"urd_Arab", CanonicalLanguage::urdu},
      {"arb_Arab", CanonicalLanguage::arabic},
      {"deu_Latn", CanonicalLanguage::german},
      {"eng_Latn", CanonicalLanguage::english},
      {"spa_Latn", CanonicalLanguage::spanish},
      {"ron_Latn", CanonicalLanguage::romanian},
      {"fra_Latn", CanonicalLanguage::french},
      {"ita_Latn", CanonicalLanguage::other_latin},
      {"kor_Hang", CanonicalLanguage::other},
  };
  for (const auto& [raw, expected] : table) {
    CAPTURE(raw);
    CHECK(parse_label(raw) == expected);
  }
}

TEST_CASE("parse_label agrees with the reference truth table on random labels") {
  ifl::SeededRng rng(101);
  auto random_iso = [&] {
    std::string s;
    for (int i = 0; i < 3; ++i) s += char('a' + rng.below(26));
    return s;
  };
  const std::vector<std::string> scripts = {"Hani", "Jpan", "Deva", "Beng", "Hebr",
                                            "Thai", "Cyrl", "Zzzz", "Arab", "Latn",
                                            "Hang", "Grek", "Geor", "Taml"};
  for (int rep = 0; rep < 500; ++rep) {
    const std::string iso = random_iso();
    const std::string script = scripts[rng.below(scripts.size())];
    const std::string raw = iso + "_" + script;
    CAPTURE(raw);
    CHECK(to_string(parse_label(raw)) == oracle::collapse_label_reference(iso, script));
  }
}

TEST_CASE("parse_label rejects malformed labels") {
  using Catch::Matchers::ContainsSubstring;
  for (const char* bad : {"deuLatn", "deu_Latn_x", "de_Latn", "deua_Latn", "deu_latn",
                          "deu_LATN", "deu_Lat", "DEU_Latn", "d3u_Latn", ""})
    CHECK_THROWS_WITH(parse_label(bad), ContainsSubstring("malformed language label"));
}

TEST_CASE("score_fidelity compares canonical languages") {
  CHECK(score_fidelity(CanonicalLanguage::german, CanonicalLanguage::german).value == 1);
  CHECK(score_fidelity(CanonicalLanguage::german, CanonicalLanguage::english).value == 0);
  CHECK(score_fidelity(CanonicalLanguage::chinese, parse_label("cmn_Hani")).value == 1);
}

TEST_CASE("score_fidelity is symmetric between concrete languages") {
  const std::vector<CanonicalLanguage> concrete = {
      CanonicalLanguage::german, CanonicalLanguage::english, CanonicalLanguage::chinese,
      CanonicalLanguage::urdu, CanonicalLanguage::thai};
  for (auto a : concrete)
    for (auto b : concrete) CHECK(score_fidelity(a, b).value == score_fidelity(b, a).value);
}

TEST_CASE("score_fidelity rejects non-concrete query languages") {
  using Catch::Matchers::ContainsSubstring;
  for (auto lang : {CanonicalLanguage::none, CanonicalLanguage::other,
                    CanonicalLanguage::other_latin})
    CHECK_THROWS_WITH(score_fidelity(lang, CanonicalLanguage::german),
                      ContainsSubstring("concrete language"));
}

namespace {

ResponseRecord make_record(const std::string& model, const std::string& dataset,
                           CanonicalLanguage lang, Condition cond, double proxy) {
  ResponseRecord rec;
  rec.id = model + "-" + dataset;
  rec.model = model;
  rec.dataset = dataset;
  rec.language = lang;
  rec.condition = cond;
  rec.proxy_fidelity = proxy;
  return rec;
}

}  // namespace

TEST_CASE("summarize_fidelity computes a two-point mean") {
  std::vector<ResponseRecord> records = {
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 1.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 0.0),
  };
  const auto table = summarize_fidelity(records, {GroupKey::model});
  REQUIRE(table.size() == 1);
  CHECK(table[0].count == 2);
  CHECK(table[0].mean_fidelity == Catch::Approx(0.5));
}

TEST_CASE("summarize_fidelity splits conditions on a mixed fixture") {
  std::vector<ResponseRecord> records = {
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 1.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 0.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 0.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::text, 1.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::text, 1.0),
      make_record("m", "maxm", CanonicalLanguage::german, Condition::text, 0.0),
  };
  const auto table = summarize_fidelity(records, {GroupKey::condition});
  REQUIRE(table.size() == 2);
  CHECK(table[0].group[0] == "image");
  CHECK(table[0].count == 3);
  CHECK(table[0].mean_fidelity == Catch::Approx(1.0 / 3.0));
  CHECK(table[1].group[0] == "text");
  CHECK(table[1].mean_fidelity == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("summarize_fidelity is invariant to input order") {
  std::vector<ResponseRecord> records;
  ifl::SeededRng rng(5);
  for (int i = 0; i < 12; ++i)
    records.push_back(make_record(i % 2 ? "a" : "b", "maxm", CanonicalLanguage::german,
                                  i % 3 ? Condition::image : Condition::text,
                                  rng.bernoulli(0.5) ? 1.0 : 0.0));
  const auto keys = std::vector<GroupKey>{GroupKey::model, GroupKey::condition};
  const auto before = summarize_fidelity(records, keys);
  std::reverse(records.begin(), records.end());
  const auto after = summarize_fidelity(records, keys);
  REQUIRE(before.size() == after.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].group == after[i].group);
    CHECK(before[i].count == after[i].count);
    CHECK(before[i].mean_fidelity == Catch::Approx(after[i].mean_fidelity));
    CHECK(before[i].mean_fidelity >= 0.0);
    CHECK(before[i].mean_fidelity <= 1.0);
    total += before[i].count;
  }
  CHECK(total == records.size());
}

TEST_CASE("summarize_fidelity of an empty input is an empty table") {
  CHECK(summarize_fidelity({}, {GroupKey::model}).empty());
}

TEST_CASE("score_records fills proxies from raw labels") {
  std::vector<ResponseRecord> records = {
      make_record("m", "maxm", CanonicalLanguage::german, Condition::image, 0.0)};
  records[0].glotlid_label = "deu_Latn";
  score_records(records);
  CHECK(records[0].proxy_fidelity == 1.0);
  records[0].glotlid_label = "eng_Latn";
  score_records(records);
  CHECK(records[0].proxy_fidelity == 0.0);
}
