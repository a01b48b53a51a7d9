#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ifl/error.hpp"
#include "ifl/langid.hpp"
#include "ifl/matrix.hpp"
#include "ifl/repsim.hpp"
#include "ifl/rng.hpp"

namespace ifl::steer {

using langid::CanonicalLanguage;
using TokenId = std::uint32_t;

struct TokenRange {
  TokenId begin = 0;
  TokenId end = 0;  // exclusive
  bool contains(TokenId t) const { return t >= begin && t < end; }
  TokenId size() const { return end - begin; }
};

/// Configuration of the deterministic toy decoder. Each language owns a
/// disjoint token-id range; the model is built so that prompts made of
/// language-k tokens keep reinforcing a planted direction d_k in the
/// residual stream, which makes language steering measurable at desk scale.
struct ToyLmConfig {
  std::size_t vocab_size = 96;
  std::size_t hidden_dim = 64;
  std::size_t depth = 30;
  std::size_t heads = 4;
  std::size_t max_seq = 64;
  std::map<CanonicalLanguage, TokenRange> language_partition;
  TokenRange shared_range;
  std::uint64_t seed = 0;

  // Constructive strengths (see build_toy_lm).
  double embed_noise = 0.25;    // random embedding component
  double direction_gain = 2.0;  // language direction added to token embeddings
  double unembed_gain = 1.0;    // language direction in unembedding rows
  double amplifier_gain = 0.5;  // feedforward boost of detected language activity
  double gate_bias = 0.5;       // activity threshold before the boost fires
  double mix_scale = 0.05;      // scale of the random attention/feedforward maps

  void validate() const {
    if (depth < 3) throw Error("depth must be at least 3");
    if (hidden_dim == 0 || heads == 0 || hidden_dim % heads != 0)
      throw Error("hidden dimension must divide evenly into heads");
    if (language_partition.empty()) throw Error("invalid partition: no languages");
    if (language_partition.size() > hidden_dim)
      throw Error("invalid partition: more languages than hidden dimensions");
    std::vector<TokenRange> ranges;
    for (const auto& [lang, range] : ranges_with_shared())
      ranges.push_back(range);
    for (const auto& r : ranges) {
      if (r.begin >= r.end || r.end > vocab_size)
        throw Error("invalid partition: range outside vocabulary");
    }
    for (std::size_t i = 0; i < ranges.size(); ++i)
      for (std::size_t j = i + 1; j < ranges.size(); ++j) {
        const bool disjoint = ranges[i].end <= ranges[j].begin || ranges[j].end <= ranges[i].begin;
        if (!disjoint) throw Error("invalid partition: overlapping ranges");
      }
  }

  std::vector<std::pair<CanonicalLanguage, TokenRange>> ranges_with_shared() const {
    std::vector<std::pair<CanonicalLanguage, TokenRange>> all(language_partition.begin(),
                                                              language_partition.end());
    all.emplace_back(CanonicalLanguage::none, shared_range);
    return all;
  }

  /// Language owning a token id, or nullopt for shared/unassigned tokens.
  std::optional<CanonicalLanguage> token_language(TokenId t) const {
    for (const auto& [lang, range] : language_partition)
      if (range.contains(t)) return lang;
    return std::nullopt;
  }

  const TokenRange& language_range(CanonicalLanguage lang) const {
    auto it = language_partition.find(lang);
    if (it == language_partition.end())
      throw Error(std::string("language not in partition: ") + langid::to_string(lang));
    return it->second;
  }
};

inline ToyLmConfig default_toy_config(std::size_t depth = 30, std::uint64_t seed = 0) {
  ToyLmConfig config;
  config.depth = depth;
  config.seed = seed;
  config.language_partition = {
      {CanonicalLanguage::english, {0, 20}},
      {CanonicalLanguage::german, {20, 40}},
      {CanonicalLanguage::chinese, {40, 60}},
      {CanonicalLanguage::spanish, {60, 80}},
  };
  config.shared_range = {80, 96};
  return config;
}

struct ToyLmBlock {
  Matrix wq, wk, wv, wo;    // hidden x hidden
  Matrix w1;                // ff x hidden
  std::vector<double> b1;   // ff
  Matrix w2;                // hidden x ff
};

/// Decoder-only toy transformer with pre-norm blocks and planted, mutually
/// orthogonal language directions. Parameters are immutable after build and
/// the forward pass is pure.
class ToyLm {
 public:
  ToyLmConfig config;
  Matrix embeddings;    // vocab x hidden
  Matrix unembedding;   // vocab x hidden
  std::vector<ToyLmBlock> blocks;
  std::vector<CanonicalLanguage> direction_languages;
  Matrix directions;  // languages x hidden, orthonormal rows

  std::vector<double> direction(CanonicalLanguage lang) const {
    for (std::size_t i = 0; i < direction_languages.size(); ++i)
      if (direction_languages[i] == lang) {
        std::vector<double> d(config.hidden_dim);
        for (std::size_t j = 0; j < config.hidden_dim; ++j) d[j] = directions(i, j);
        return d;
      }
    throw Error(std::string("no planted direction for ") + langid::to_string(lang));
  }
};

namespace detail {

inline Matrix random_matrix(SeededRng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  const double s = scale / std::sqrt(static_cast<double>(cols));
  for (auto& v : m.data()) v = s * rng.normal();
  return m;
}

inline void layer_norm_row(const double* in, double* out, std::size_t dim) {
  double mean = 0.0;
  for (std::size_t i = 0; i < dim; ++i) mean += in[i];
  mean /= static_cast<double>(dim);
  double var = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = in[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(dim);
  const double inv = 1.0 / std::sqrt(var + 1e-5);
  for (std::size_t i = 0; i < dim; ++i) out[i] = (in[i] - mean) * inv;
}

inline Matrix layer_norm(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    layer_norm_row(x.row_ptr(i), out.row_ptr(i), x.cols());
  return out;
}

}  // namespace detail

/// Build the toy model. Token embeddings of language k carry +c*d_k, the
/// unembedding rows of language-k tokens carry +g*d_k, and each feedforward
/// detects per-language activity in the normalized stream and adds it back
/// scaled by amplifier_gain, so the dominant language keeps accumulating.
/// Attention and the remaining feedforward channels are small random maps;
/// the residual stream dominates.
inline ToyLm build_toy_lm(const ToyLmConfig& config) {
  config.validate();
  ToyLm model;
  model.config = config;
  SeededRng rng(config.seed);

  const std::size_t dim = config.hidden_dim;
  const std::size_t n_lang = config.language_partition.size();

  // Orthonormal language directions via Gram-Schmidt on Gaussian draws.
  model.directions = Matrix(n_lang, dim);
  for (const auto& [lang, range] : config.language_partition)
    model.direction_languages.push_back(lang);
  for (std::size_t k = 0; k < n_lang; ++k) {
    std::vector<double> v(dim);
    for (auto& e : v) e = rng.normal();
    for (std::size_t prev = 0; prev < k; ++prev) {
      double c = 0.0;
      for (std::size_t j = 0; j < dim; ++j) c += v[j] * model.directions(prev, j);
      for (std::size_t j = 0; j < dim; ++j) v[j] -= c * model.directions(prev, j);
    }
    const double nv = norm2(v);
    for (std::size_t j = 0; j < dim; ++j) model.directions(k, j) = v[j] / nv;
  }
  auto lang_index = [&](CanonicalLanguage lang) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < model.direction_languages.size(); ++i)
      if (model.direction_languages[i] == lang) return i;
    return std::nullopt;
  };

  model.embeddings = detail::random_matrix(rng, config.vocab_size, dim, config.embed_noise);
  model.unembedding = detail::random_matrix(rng, config.vocab_size, dim, config.embed_noise);
  for (TokenId t = 0; t < config.vocab_size; ++t) {
    const auto lang = config.token_language(t);
    if (!lang) continue;
    const std::size_t k = *lang_index(*lang);
    for (std::size_t j = 0; j < dim; ++j) {
      model.embeddings(t, j) += config.direction_gain * model.directions(k, j);
      model.unembedding(t, j) += config.unembed_gain * model.directions(k, j);
    }
  }

  const std::size_t ff_dim = dim;
  model.blocks.reserve(config.depth);
  for (std::size_t l = 0; l < config.depth; ++l) {
    ToyLmBlock block;
    block.wq = detail::random_matrix(rng, dim, dim, config.mix_scale);
    block.wk = detail::random_matrix(rng, dim, dim, config.mix_scale);
    block.wv = detail::random_matrix(rng, dim, dim, config.mix_scale);
    block.wo = detail::random_matrix(rng, dim, dim, config.mix_scale);
    block.w1 = detail::random_matrix(rng, ff_dim, dim, config.mix_scale);
    block.w2 = detail::random_matrix(rng, dim, ff_dim, config.mix_scale);
    block.b1.assign(ff_dim, 0.0);
    // First n_lang feedforward channels: detect language-k activity and add
    // amplifier_gain * activity * d_k back into the stream.
    for (std::size_t k = 0; k < n_lang; ++k) {
      for (std::size_t j = 0; j < dim; ++j) {
        block.w1(k, j) = model.directions(k, j);
        block.w2(j, k) = config.amplifier_gain * model.directions(k, j);
      }
      block.b1[k] = -config.gate_bias;
    }
    model.blocks.push_back(std::move(block));
  }
  return model;
}

/// Additive intervention on the output of one block. The vector is added to
/// every position at or after `start_pos`.
struct LayerEdit {
  std::size_t layer = 0;
  std::vector<double> delta;
  std::size_t start_pos = 0;
};

struct ForwardResult {
  std::vector<Matrix> layer_outputs;  // depth blocks; edits already applied
  Matrix logits;                      // seq x vocab
};

/// Full forward pass recording every block output. Edits are added to the
/// named block's output before the next block consumes it; an all-zero edit
/// is skipped outright so it cannot perturb bit patterns.
inline ForwardResult forward_with_hooks(const ToyLm& model, const std::vector<TokenId>& tokens,
                                        const std::vector<LayerEdit>& edits = {}) {
  const auto& config = model.config;
  if (tokens.empty()) throw Error("empty token sequence");
  if (tokens.size() > config.max_seq) throw Error("sequence longer than max_seq");
  for (TokenId t : tokens)
    if (t >= config.vocab_size) throw Error("token id out of range: " + std::to_string(t));
  for (const auto& edit : edits) {
    if (edit.layer >= config.depth)
      throw Error("edit layer out of range: " + std::to_string(edit.layer));
    if (edit.delta.size() != config.hidden_dim)
      throw Error("edit vector has wrong dimension");
  }

  const std::size_t seq = tokens.size();
  const std::size_t dim = config.hidden_dim;
  const std::size_t heads = config.heads;
  const std::size_t dh = dim / heads;

  Matrix h(seq, dim);
  for (std::size_t p = 0; p < seq; ++p)
    for (std::size_t j = 0; j < dim; ++j) h(p, j) = model.embeddings(tokens[p], j);

  ForwardResult result;
  result.layer_outputs.reserve(config.depth);

  for (std::size_t l = 0; l < config.depth; ++l) {
    const ToyLmBlock& block = model.blocks[l];

    // Pre-norm causal multi-head attention.
    const Matrix xn = detail::layer_norm(h);
    const Matrix q = xn * block.wq;
    const Matrix k = xn * block.wk;
    const Matrix v = xn * block.wv;
    Matrix ctx(seq, dim);
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<double> scores(seq);
    for (std::size_t head = 0; head < heads; ++head) {
      const std::size_t off = head * dh;
      for (std::size_t i = 0; i < seq; ++i) {
        double max_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += q(i, off + c) * k(j, off + c);
          scores[j] = s * inv_sqrt_dh;
          max_score = std::max(max_score, scores[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          scores[j] = std::exp(scores[j] - max_score);
          denom += scores[j];
        }
        for (std::size_t j = 0; j <= i; ++j) {
          const double a = scores[j] / denom;
          for (std::size_t c = 0; c < dh; ++c) ctx(i, off + c) += a * v(j, off + c);
        }
      }
    }
    const Matrix attn_out = ctx * block.wo;
    for (std::size_t p = 0; p < seq; ++p)
      for (std::size_t j = 0; j < dim; ++j) h(p, j) += attn_out(p, j);

    // Pre-norm feedforward with the language amplifier in its first channels.
    const Matrix fn = detail::layer_norm(h);
    for (std::size_t p = 0; p < seq; ++p) {
      std::vector<double> act(block.b1.size());
      for (std::size_t r = 0; r < act.size(); ++r) {
        double s = block.b1[r];
        for (std::size_t j = 0; j < dim; ++j) s += block.w1(r, j) * fn(p, j);
        act[r] = s > 0.0 ? s : 0.0;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < act.size(); ++r) s += block.w2(j, r) * act[r];
        h(p, j) += s;
      }
    }

    for (const auto& edit : edits) {
      if (edit.layer != l) continue;
      const bool all_zero =
          std::all_of(edit.delta.begin(), edit.delta.end(), [](double d) { return d == 0.0; });
      if (all_zero) continue;
      for (std::size_t p = edit.start_pos; p < seq; ++p)
        for (std::size_t j = 0; j < dim; ++j) h(p, j) += edit.delta[j];
    }
    result.layer_outputs.push_back(h);
  }

  const Matrix fn = detail::layer_norm(h);
  result.logits = Matrix(seq, config.vocab_size);
  for (std::size_t p = 0; p < seq; ++p)
    for (TokenId t = 0; t < config.vocab_size; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim; ++j) s += fn(p, j) * model.unembedding(t, j);
      result.logits(p, t) = s;
    }
  return result;
}

enum class Pooling { final_position, mean };

/// An intermediate-layer steering vector with its injection layer and scale.
struct SteeringAttribute {
  std::size_t layer = 0;
  std::vector<double> direction;
  double scale = 1.0;
};

inline std::size_t default_attribute_layer(std::size_t depth) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(depth) / 3.0));
}

/// Language attribute: pooled hidden state of the translated prompt minus
/// the pooled hidden state of the reference prompt, read at one layer
/// (default: a third of the depth). Pooling uses the final position, the
/// causal summary of the prompt; mean pooling is available.
inline SteeringAttribute compute_language_attribute(const ToyLm& model,
                                                    const std::vector<TokenId>& x_lang,
                                                    const std::vector<TokenId>& x_en,
                                                    std::optional<std::size_t> layer = {},
                                                    Pooling pooling = Pooling::final_position) {
  if (x_lang.empty() || x_en.empty()) throw Error("empty prompt");
  const std::size_t l = layer.value_or(default_attribute_layer(model.config.depth));
  if (l == 0 || l >= model.config.depth)
    throw Error("attribute layer must satisfy 0 < layer < depth");
  const ForwardResult fl = forward_with_hooks(model, x_lang);
  const ForwardResult fe = forward_with_hooks(model, x_en);
  auto pool = [&](const Matrix& states) {
    std::vector<double> out(states.cols(), 0.0);
    if (pooling == Pooling::final_position) {
      for (std::size_t j = 0; j < states.cols(); ++j) out[j] = states(states.rows() - 1, j);
    } else {
      for (std::size_t i = 0; i < states.rows(); ++i)
        for (std::size_t j = 0; j < states.cols(); ++j) out[j] += states(i, j);
      for (auto& v : out) v /= static_cast<double>(states.rows());
    }
    return out;
  };
  const std::vector<double> a = pool(fl.layer_outputs[l]);
  const std::vector<double> b = pool(fe.layer_outputs[l]);
  SteeringAttribute attr;
  attr.layer = l;
  attr.direction.resize(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) attr.direction[j] = a[j] - b[j];
  return attr;
}

/// Greedy decode with the attribute injected at its layer for generated
/// positions only; prompt positions are never edited. Returns the generated
/// tokens (prompt excluded).
inline std::vector<TokenId> apply_steering(const ToyLm& model, const std::vector<TokenId>& prompt,
                                           const SteeringAttribute& attribute,
                                           std::size_t max_new_tokens) {
  if (max_new_tokens == 0) throw Error("max_new_tokens must be positive");
  if (prompt.empty()) throw Error("empty prompt");
  if (attribute.layer == 0 || attribute.layer >= model.config.depth)
    throw Error("attribute layer must satisfy 0 < layer < depth");
  if (prompt.size() + max_new_tokens > model.config.max_seq)
    throw Error("prompt plus generation exceeds max_seq");

  std::vector<LayerEdit> edits;
  std::vector<double> scaled(attribute.direction.size());
  bool nonzero = false;
  for (std::size_t j = 0; j < scaled.size(); ++j) {
    scaled[j] = attribute.scale * attribute.direction[j];
    nonzero |= scaled[j] != 0.0;
  }
  if (nonzero) edits.push_back({attribute.layer, std::move(scaled), prompt.size()});

  std::vector<TokenId> tokens = prompt;
  for (std::size_t step = 0; step < max_new_tokens; ++step) {
    const ForwardResult fr = forward_with_hooks(model, tokens, edits);
    const std::size_t last = tokens.size() - 1;
    TokenId best = 0;
    double best_logit = fr.logits(last, 0);
    for (TokenId t = 1; t < model.config.vocab_size; ++t)
      if (fr.logits(last, t) > best_logit) {
        best_logit = fr.logits(last, t);
        best = t;
      }
    tokens.push_back(best);
  }
  return std::vector<TokenId>(tokens.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
                              tokens.end());
}

/// Fraction of tokens inside the target language's range; shared tokens are
/// excluded from numerator and denominator.
inline double toy_fidelity(const std::vector<TokenId>& tokens, CanonicalLanguage target,
                           const ToyLmConfig& config) {
  if (tokens.empty()) throw Error("empty token list");
  const TokenRange& range = config.language_range(target);
  std::size_t considered = 0;
  std::size_t hits = 0;
  for (TokenId t : tokens) {
    if (config.shared_range.contains(t)) continue;
    ++considered;
    if (range.contains(t)) ++hits;
  }
  if (considered == 0) throw Error("all tokens shared: fidelity undefined");
  return static_cast<double>(hits) / static_cast<double>(considered);
}

/// Deterministic prompt made of tokens from one language's range.
inline std::vector<TokenId> make_prompt(const ToyLmConfig& config, CanonicalLanguage lang,
                                        std::size_t length) {
  const TokenRange& range = config.language_range(lang);
  std::vector<TokenId> prompt(length);
  for (std::size_t i = 0; i < length; ++i)
    prompt[i] = range.begin + static_cast<TokenId>(i % range.size());
  return prompt;
}

/// Per-layer activation traces of a prompt, tagged with each token's
/// partition language (shared tokens get `none`); the toy model is text-only.
inline std::vector<repsim::ActivationTrace> export_traces(const ToyLm& model,
                                                          const std::vector<TokenId>& tokens,
                                                          const std::string& model_name) {
  const ForwardResult fr = forward_with_hooks(model, tokens);
  std::vector<repsim::TokenMeta> meta;
  meta.reserve(tokens.size());
  for (TokenId t : tokens) {
    repsim::TokenMeta m;
    m.modality = repsim::Modality::text;
    m.language = model.config.token_language(t).value_or(CanonicalLanguage::none);
    meta.push_back(m);
  }
  std::vector<repsim::ActivationTrace> traces;
  traces.reserve(model.config.depth);
  for (std::size_t l = 0; l < model.config.depth; ++l) {
    repsim::ActivationTrace trace;
    trace.model = model_name;
    trace.layer = l;
    trace.hidden = fr.layer_outputs[l];
    trace.token_meta = meta;
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace ifl::steer
