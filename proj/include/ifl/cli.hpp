#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifl/design.hpp"
#include "ifl/dsl.hpp"
#include "ifl/langid.hpp"
#include "ifl/report.hpp"
#include "ifl/repsim.hpp"
#include "ifl/response_io.hpp"
#include "ifl/steer.hpp"
#include "ifl/table_io.hpp"
#include "ifl/trace_io.hpp"

namespace ifl::cli {

namespace fs = std::filesystem;

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out_dir = "ifl-out";
};

namespace detail {

inline void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--seed", opts.seed, "random seed recorded in the manifest")
      ->capture_default_str();
  sub->add_option("--out-dir", opts.out_dir, "directory for outputs and manifest")
      ->capture_default_str();
}

inline fs::path prepare_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

inline void finish(io::Manifest& manifest, const fs::path& dir, std::ostream& out) {
  out << "manifest: " << manifest.write(dir) << "\n";
}

inline std::string join_group_label(const std::vector<std::string>& parts) {
  std::string label;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) label += '/';
    label += parts[i];
  }
  return label;
}

struct TraceSet {
  std::vector<repsim::ActivationTrace> traces;
  std::vector<std::string> files;  // the paths actually read
};

/// Load a trace set: explicit files, or every *.iflt inside a directory.
/// Traces are ordered by their header layer index.
inline TraceSet load_trace_set(const std::vector<std::string>& paths) {
  TraceSet set;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.path().extension() == ".iflt") found.push_back(entry.path().generic_string());
      std::sort(found.begin(), found.end());
      set.files.insert(set.files.end(), found.begin(), found.end());
    } else {
      set.files.push_back(p);
    }
  }
  if (set.files.empty()) throw Error("no trace files found");
  for (const auto& f : set.files) set.traces.push_back(io::read_trace(f));
  std::sort(set.traces.begin(), set.traces.end(),
            [](const auto& a, const auto& b) { return a.layer < b.layer; });
  return set;
}

inline repsim::TokenFilter make_token_filter(const std::string& modality,
                                             const std::string& language) {
  if (modality == "all" && language == "all") return {};
  std::optional<repsim::Modality> want_modality;
  if (modality != "all") want_modality = repsim::modality_from_string(modality);
  std::optional<langid::CanonicalLanguage> want_language;
  if (language != "all") want_language = langid::language_from_string(language);
  return [want_modality, want_language](const repsim::TokenMeta& meta) {
    if (want_modality && meta.modality != *want_modality) return false;
    if (want_language && meta.language != *want_language) return false;
    return true;
  };
}

}  // namespace detail

inline void run_fidelity_score(const CommonOpts& common, const std::string& input,
                               const std::string& group_by, std::ostream& out) {
  auto records = io::load_responses(input);
  langid::score_records(records);
  std::vector<langid::GroupKey> keys;
  std::string token;
  std::istringstream ss(group_by);
  while (std::getline(ss, token, ',')) keys.push_back(langid::group_key_from_string(token));
  const auto table = langid::summarize_fidelity(records, keys);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"group", "count", "mean"});
  for (const auto& row : table)
    csv.add_row({detail::join_group_label(row.group), std::to_string(row.count),
                 io::format_double(row.mean_fidelity)});
  csv.write((dir / "fidelity_summary.csv").string());
  out << "scored " << records.size() << " records into " << table.size() << " groups\n";

  io::Manifest manifest("fidelity score", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_parameter("group_by", group_by);
  manifest.add_input(input);
  manifest.add_output(dir, "fidelity_summary.csv");
  detail::finish(manifest, dir, out);
}

inline void run_fidelity_effect(const CommonOpts& common, const std::string& input,
                                std::ostream& out) {
  auto records = io::load_responses(input);
  langid::score_records(records);
  const auto effects = design::estimate_ifl(records);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"group", "estimate", "lower", "upper"});
  for (const auto& e : effects) {
    csv.add_row({e.model + "/" + e.dataset, io::format_double(e.effect.estimate),
                 io::format_double(e.effect.lower), io::format_double(e.effect.upper)});
    out << e.model << "/" << e.dataset << ": " << io::format_fixed(e.effect.estimate, 4) << " ["
        << io::format_fixed(e.effect.lower, 4) << ", " << io::format_fixed(e.effect.upper, 4)
        << "]\n";
  }
  csv.write((dir / "ifl_effects.csv").string());

  io::Manifest manifest("fidelity effect", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_input(input);
  manifest.add_output(dir, "ifl_effects.csv");
  detail::finish(manifest, dir, out);
}

inline void run_dsl_weights(const CommonOpts& common, const std::string& input,
                            std::size_t sample_size, std::ostream& out) {
  const auto records = io::load_responses(input);
  const auto weights = dsl::compute_sampling_weights(records, sample_size);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"id", "raw_weight", "inclusion_prob"});
  for (std::size_t i = 0; i < records.size(); ++i)
    csv.add_row({records[i].id, io::format_double(weights.raw[i]),
                 io::format_double(weights.inclusion_prob[i])});
  csv.write((dir / "sampling_weights.csv").string());
  double total = 0.0;
  for (double p : weights.inclusion_prob) total += p;
  out << "expected sample size: " << io::format_fixed(total, 3) << "\n";

  io::Manifest manifest("dsl weights", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_parameter("sample_size", std::to_string(sample_size));
  manifest.add_input(input);
  manifest.add_output(dir, "sampling_weights.csv");
  detail::finish(manifest, dir, out);
}

inline void run_dsl_estimate(const CommonOpts& common, const std::string& input,
                             bool per_language, bool bootstrap, std::size_t resamples,
                             std::ostream& out) {
  auto records = io::load_responses(input);
  langid::score_records(records);

  std::map<std::vector<std::string>, std::vector<langid::ResponseRecord>> groups;
  for (const auto& rec : records) {
    std::vector<std::string> key = {rec.model, rec.dataset, langid::to_string(rec.condition)};
    if (per_language) key.push_back(langid::to_string(rec.language));
    groups[key].push_back(rec);
  }

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"group", "estimate", "lower", "upper"});
  std::size_t na_total = 0;
  SeededRng rng(common.seed);
  for (const auto& [key, group] : groups) {
    const auto converted = dsl::to_annotated(group);
    na_total += converted.na_excluded;
    const auto est = bootstrap
                         ? dsl::dsl_mean_ci(converted.records, 0.95,
                                            dsl::VarianceMethod::bootstrap, &rng, resamples)
                         : dsl::dsl_mean_ci(converted.records);
    csv.add_row({detail::join_group_label(key), io::format_double(est.estimate),
                 io::format_double(est.lower), io::format_double(est.upper)});
  }
  csv.write((dir / "dsl_estimates.csv").string());
  out << "estimated " << groups.size() << " groups";
  if (na_total) out << " (" << na_total << " NA annotations treated as unannotated)";
  out << "\n";

  io::Manifest manifest("dsl estimate", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_parameter("per_language", per_language ? "true" : "false");
  manifest.add_parameter("variance", bootstrap ? "bootstrap" : "plugin");
  manifest.add_input(input);
  manifest.add_output(dir, "dsl_estimates.csv");
  detail::finish(manifest, dir, out);
}

inline void run_design_regress(const CommonOpts& common, const std::string& input,
                               bool main_effects, bool classical, std::ostream& out) {
  const auto rows = io::load_design_csv(input);
  const auto result = design::fit_design_effects(rows, !classical, main_effects);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"coef", "estimate", "lower", "upper"});
  for (std::size_t j = 0; j < result.coefficients.size(); ++j) {
    csv.add_row({result.column_names[j], io::format_double(result.coefficients[j]),
                 io::format_double(result.ci95[j].first),
                 io::format_double(result.ci95[j].second)});
    out << result.column_names[j] << ": " << io::format_fixed(result.coefficients[j], 4) << " ["
        << io::format_fixed(result.ci95[j].first, 4) << ", "
        << io::format_fixed(result.ci95[j].second, 4) << "]\n";
  }
  csv.write((dir / "design_effects.csv").string());

  io::Manifest manifest("design regress", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_parameter("main_effects", main_effects ? "true" : "false");
  manifest.add_parameter("covariance", classical ? "classical" : "hc1");
  manifest.add_input(input);
  manifest.add_output(dir, "design_effects.csv");
  detail::finish(manifest, dir, out);
}

inline void run_design_aggregate(const CommonOpts& common, const std::string& input,
                                 std::ostream& out) {
  const auto rows = io::load_intervention_csv(input);
  const auto summary = design::aggregate_intervention(rows);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"group", "avg_ifl", "avg_remedied", "diff", "relative_increase_pct"});
  csv.add_row({fs::path(input).stem().string(),
               io::format_fixed(design::printed(summary.avg_ifl), 3),
               io::format_fixed(design::printed(summary.avg_remedied), 3),
               io::format_fixed(design::printed(summary.diff), 3),
               summary.relative_increase_pct ? std::to_string(*summary.relative_increase_pct)
                                             : "undefined"});
  csv.write((dir / "intervention_summary.csv").string());

  out << "(" << io::format_fixed(design::printed(summary.avg_ifl), 3) << ", "
      << io::format_fixed(design::printed(summary.avg_remedied), 3) << ", "
      << io::format_fixed(design::printed(summary.diff), 3) << ", ";
  if (summary.relative_increase_pct)
    out << *summary.relative_increase_pct << "%";
  else
    out << "undefined";
  out << ")\n";

  io::Manifest manifest("design aggregate", common.seed);
  manifest.add_parameter("input", input);
  manifest.add_input(input);
  manifest.add_output(dir, "intervention_summary.csv");
  detail::finish(manifest, dir, out);
}

inline void run_repsim_cka(const CommonOpts& common, const std::vector<std::string>& traces_a,
                           const std::vector<std::string>& traces_b, const std::string& modality,
                           const std::string& language, double bandwidth_frac,
                           std::ostream& out) {
  const auto set_a = detail::load_trace_set(traces_a);
  const auto set_b = detail::load_trace_set(traces_b);
  const auto filter = detail::make_token_filter(modality, language);
  const auto grid = repsim::cka_grid(set_a.traces, set_b.traces, filter, bandwidth_frac);

  const fs::path dir = detail::prepare_out_dir(common);
  io::cka_grid_csv(grid).write((dir / "cka_grid.csv").string());
  io::emit_cka_svg(grid, (dir / "cka_grid.svg").string());
  out << "grid " << grid.layers_a << "x" << grid.layers_b << " written\n";

  io::Manifest manifest("repsim cka", common.seed);
  manifest.add_parameter("modality", modality);
  manifest.add_parameter("language", language);
  manifest.add_parameter("bandwidth_frac", io::format_double(bandwidth_frac));
  for (const auto& f : set_a.files) manifest.add_input(f);
  for (const auto& f : set_b.files) manifest.add_input(f);
  manifest.add_output(dir, "cka_grid.csv");
  manifest.add_output(dir, "cka_grid.svg");
  detail::finish(manifest, dir, out);
}

inline void run_repsim_separation(const CommonOpts& common, const std::string& trace_path,
                                  const std::string& label_by, std::ostream& out) {
  const auto trace = io::read_trace(trace_path);
  const repsim::Labeling labeling =
      label_by == "modality" ? repsim::Labeling::modality : repsim::Labeling::language;
  if (label_by != "modality" && label_by != "language")
    throw Error("--label-by must be 'modality' or 'language'");
  const double silhouette = repsim::separation_silhouette(trace, labeling);
  const auto projection = repsim::pca_project_2d(trace);

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter sep({"labeling", "silhouette"});
  sep.add_row({label_by, io::format_double(silhouette)});
  sep.write((dir / "separation.csv").string());
  io::CsvWriter proj({"token", "x", "y", "modality", "language"});
  for (std::size_t i = 0; i < projection.scores.rows(); ++i)
    proj.add_row({std::to_string(i), io::format_double(projection.scores(i, 0)),
                  io::format_double(projection.scores(i, 1)),
                  repsim::to_string(trace.token_meta[i].modality),
                  langid::to_string(trace.token_meta[i].language)});
  proj.write((dir / "pca_projection.csv").string());
  out << "silhouette (" << label_by << "): " << io::format_fixed(silhouette, 4) << "\n";
  out << "explained variance: " << io::format_fixed(projection.explained_variance[0], 4) << ", "
      << io::format_fixed(projection.explained_variance[1], 4) << "\n";

  io::Manifest manifest("repsim separation", common.seed);
  manifest.add_parameter("label_by", label_by);
  manifest.add_input(trace_path);
  manifest.add_output(dir, "separation.csv");
  manifest.add_output(dir, "pca_projection.csv");
  detail::finish(manifest, dir, out);
}

inline void run_steer_demo(const CommonOpts& common, std::size_t depth,
                           const std::string& target_lang, double alpha,
                           std::size_t prompt_len, std::size_t max_new_tokens,
                           std::ostream& out) {
  using langid::CanonicalLanguage;
  const auto target = langid::language_from_string(target_lang);
  const auto config = steer::default_toy_config(depth, common.seed);
  const auto model = steer::build_toy_lm(config);

  const auto prompt_en = steer::make_prompt(config, CanonicalLanguage::english, prompt_len);
  const auto prompt_target = steer::make_prompt(config, target, prompt_len);
  const auto attribute = steer::compute_language_attribute(model, prompt_target, prompt_en);

  steer::SteeringAttribute off = attribute;
  off.scale = 0.0;
  steer::SteeringAttribute on = attribute;
  on.scale = alpha;

  const auto plain = steer::apply_steering(model, prompt_en, off, max_new_tokens);
  const auto steered = steer::apply_steering(model, prompt_en, on, max_new_tokens);

  const double plain_en = steer::toy_fidelity(plain, CanonicalLanguage::english, config);
  const double plain_target = steer::toy_fidelity(plain, target, config);
  const double steered_en = steer::toy_fidelity(steered, CanonicalLanguage::english, config);
  const double steered_target = steer::toy_fidelity(steered, target, config);

  out << "steering layer: " << attribute.layer << "\n";
  out << "unsteered fidelity: english=" << io::format_fixed(plain_en, 3) << " " << target_lang
      << "=" << io::format_fixed(plain_target, 3) << "\n";
  out << "steered fidelity (alpha=" << io::format_double(alpha)
      << "): english=" << io::format_fixed(steered_en, 3) << " " << target_lang << "="
      << io::format_fixed(steered_target, 3) << "\n";

  const fs::path dir = detail::prepare_out_dir(common);
  io::CsvWriter csv({"run", "alpha", "layer", "fidelity_english", "fidelity_" + target_lang});
  csv.add_row({"unsteered", "0", std::to_string(attribute.layer), io::format_double(plain_en),
               io::format_double(plain_target)});
  csv.add_row({"steered", io::format_double(alpha), std::to_string(attribute.layer),
               io::format_double(steered_en), io::format_double(steered_target)});
  csv.write((dir / "steer_demo.csv").string());

  io::Manifest manifest("steer demo", common.seed);
  manifest.add_parameter("depth", std::to_string(depth));
  manifest.add_parameter("target_lang", target_lang);
  manifest.add_parameter("alpha", io::format_double(alpha));
  manifest.add_parameter("prompt_len", std::to_string(prompt_len));
  manifest.add_parameter("max_new_tokens", std::to_string(max_new_tokens));
  manifest.add_output(dir, "steer_demo.csv");
  detail::finish(manifest, dir, out);
}

inline void run_steer_trace_export(const CommonOpts& common, std::size_t depth,
                                   const std::string& prompt_lang, std::size_t prompt_len,
                                   std::ostream& out) {
  const auto config = steer::default_toy_config(depth, common.seed);
  const auto model = steer::build_toy_lm(config);

  std::vector<steer::TokenId> prompt;
  if (prompt_lang == "all") {
    for (const auto& [lang, range] : config.language_partition) {
      const auto part = steer::make_prompt(config, lang, prompt_len);
      prompt.insert(prompt.end(), part.begin(), part.end());
    }
  } else {
    prompt = steer::make_prompt(config, langid::language_from_string(prompt_lang), prompt_len);
  }
  const auto traces =
      steer::export_traces(model, prompt, "toy-seed" + std::to_string(common.seed));

  const fs::path dir = detail::prepare_out_dir(common);
  io::Manifest manifest("steer trace-export", common.seed);
  manifest.add_parameter("depth", std::to_string(depth));
  manifest.add_parameter("prompt_lang", prompt_lang);
  manifest.add_parameter("prompt_len", std::to_string(prompt_len));
  for (const auto& trace : traces) {
    char name[32];
    std::snprintf(name, sizeof(name), "trace_layer_%03zu.iflt", trace.layer);
    io::write_trace(trace, (dir / name).string());
    manifest.add_output(dir, name);
  }
  out << "exported " << traces.size() << " layer traces\n";
  detail::finish(manifest, dir, out);
}

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 validation/data error, 2 usage error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"image-induced fidelity loss toolkit"};
  app.require_subcommand(1);

  // fidelity
  auto* fidelity = app.add_subcommand("fidelity", "language-fidelity scoring and effects");
  fidelity->require_subcommand(1);
  CommonOpts score_common;
  std::string score_input, score_group_by = "model,dataset,condition";
  auto* score = fidelity->add_subcommand("score", "score responses and summarize by group");
  score->add_option("--input", score_input, "JSONL response file")->required();
  score->add_option("--group-by", score_group_by,
                    "comma list of model,dataset,language,condition")
      ->capture_default_str();
  detail::add_common(score, score_common);
  score->callback([&] { run_fidelity_score(score_common, score_input, score_group_by, out); });

  CommonOpts effect_common;
  std::string effect_input;
  auto* effect = fidelity->add_subcommand("effect", "image-condition effect per model/benchmark");
  effect->add_option("--input", effect_input, "JSONL response file")->required();
  detail::add_common(effect, effect_common);
  effect->callback([&] { run_fidelity_effect(effect_common, effect_input, out); });

  // dsl
  auto* dsl_cmd = app.add_subcommand("dsl", "debiased estimation utilities");
  dsl_cmd->require_subcommand(1);
  CommonOpts weights_common;
  std::string weights_input;
  std::size_t weights_sample_size = 0;
  auto* weights = dsl_cmd->add_subcommand("weights", "stratified annotation sampling weights");
  weights->add_option("--input", weights_input, "JSONL response file")->required();
  weights->add_option("--sample-size", weights_sample_size, "expected annotation count")
      ->required();
  detail::add_common(weights, weights_common);
  weights->callback(
      [&] { run_dsl_weights(weights_common, weights_input, weights_sample_size, out); });

  CommonOpts estimate_common;
  std::string estimate_input;
  bool estimate_per_language = false;
  bool estimate_bootstrap = false;
  std::size_t estimate_resamples = 2000;
  auto* estimate = dsl_cmd->add_subcommand("estimate", "debiased group means with intervals");
  estimate->add_option("--input", estimate_input, "JSONL response file")->required();
  estimate->add_flag("--per-language", estimate_per_language, "add language to the group key");
  estimate->add_flag("--bootstrap", estimate_bootstrap, "bootstrap variance instead of plug-in");
  estimate->add_option("--resamples", estimate_resamples, "bootstrap resamples")
      ->capture_default_str();
  detail::add_common(estimate, estimate_common);
  estimate->callback([&] {
    run_dsl_estimate(estimate_common, estimate_input, estimate_per_language, estimate_bootstrap,
                     estimate_resamples, out);
  });

  // design
  auto* design_cmd = app.add_subcommand("design", "design-effect regression and aggregation");
  design_cmd->require_subcommand(1);
  CommonOpts regress_common;
  std::string regress_input;
  bool regress_main_effects = false;
  bool regress_classical = false;
  auto* regress = design_cmd->add_subcommand("regress", "interaction regression with robust CIs");
  regress->add_option("--input", regress_input, "design CSV")->required();
  regress->add_flag("--main-effects", regress_main_effects, "add factor main effects");
  regress->add_flag("--classical", regress_classical, "classical instead of HC1 covariance");
  detail::add_common(regress, regress_common);
  regress->callback([&] {
    run_design_regress(regress_common, regress_input, regress_main_effects, regress_classical,
                       out);
  });

  CommonOpts aggregate_common;
  std::string aggregate_input;
  auto* aggregate = design_cmd->add_subcommand("aggregate", "average an intervention table");
  aggregate->add_option("--input", aggregate_input, "intervention CSV")->required();
  detail::add_common(aggregate, aggregate_common);
  aggregate->callback([&] { run_design_aggregate(aggregate_common, aggregate_input, out); });

  // repsim
  auto* repsim_cmd = app.add_subcommand("repsim", "representation-similarity diagnostics");
  repsim_cmd->require_subcommand(1);
  CommonOpts cka_common;
  std::vector<std::string> cka_a, cka_b;
  std::string cka_modality = "all", cka_language = "all";
  double cka_bandwidth = 1.0;
  auto* cka = repsim_cmd->add_subcommand("cka", "layer-pair CKA grid (linear + RBF)");
  cka->add_option("--traces-a", cka_a, "trace files or a directory")->required();
  cka->add_option("--traces-b", cka_b, "trace files or a directory")->required();
  cka->add_option("--modality", cka_modality, "token filter: all|image|text")
      ->capture_default_str();
  cka->add_option("--language", cka_language, "token filter: all|<canonical language>")
      ->capture_default_str();
  cka->add_option("--bandwidth-frac", cka_bandwidth, "RBF bandwidth as fraction of median dist")
      ->capture_default_str();
  detail::add_common(cka, cka_common);
  cka->callback([&] {
    run_repsim_cka(cka_common, cka_a, cka_b, cka_modality, cka_language, cka_bandwidth, out);
  });

  CommonOpts sep_common;
  std::string sep_trace, sep_label_by = "modality";
  auto* sep = repsim_cmd->add_subcommand("separation", "silhouette and 2-D projection");
  sep->add_option("--trace", sep_trace, "trace file")->required();
  sep->add_option("--label-by", sep_label_by, "modality|language")->capture_default_str();
  detail::add_common(sep, sep_common);
  sep->callback([&] { run_repsim_separation(sep_common, sep_trace, sep_label_by, out); });

  // steer
  auto* steer_cmd = app.add_subcommand("steer", "toy-model language steering");
  steer_cmd->require_subcommand(1);
  CommonOpts demo_common;
  std::size_t demo_depth = 30, demo_prompt_len = 6, demo_max_new = 24;
  std::string demo_target = "german";
  double demo_alpha = 1.0;
  auto* demo = steer_cmd->add_subcommand("demo", "steer an English prompt toward a language");
  demo->add_option("--depth", demo_depth, "layer count")->capture_default_str();
  demo->add_option("--target-lang", demo_target, "language to steer toward")
      ->capture_default_str();
  demo->add_option("--alpha", demo_alpha, "steering scale")->capture_default_str();
  demo->add_option("--prompt-len", demo_prompt_len, "prompt length")->capture_default_str();
  demo->add_option("--max-new-tokens", demo_max_new, "tokens to generate")
      ->capture_default_str();
  detail::add_common(demo, demo_common);
  demo->callback([&] {
    run_steer_demo(demo_common, demo_depth, demo_target, demo_alpha, demo_prompt_len,
                   demo_max_new, out);
  });

  CommonOpts export_common;
  std::size_t export_depth = 30, export_prompt_len = 6;
  std::string export_lang = "all";
  auto* trace_export = steer_cmd->add_subcommand("trace-export", "write per-layer toy traces");
  trace_export->add_option("--depth", export_depth, "layer count")->capture_default_str();
  trace_export->add_option("--prompt-lang", export_lang, "all|<canonical language>")
      ->capture_default_str();
  trace_export->add_option("--prompt-len", export_prompt_len, "tokens per language")
      ->capture_default_str();
  detail::add_common(trace_export, export_common);
  trace_export->callback([&] {
    run_steer_trace_export(export_common, export_depth, export_lang, export_prompt_len, out);
  });

  std::vector<const char*> argv;
  argv.push_back("ifl");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    err << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ifl::cli
