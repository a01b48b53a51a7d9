// Example: export layer traces from two differently seeded toy models and
// render their layer-pair CKA grid as an SVG heatmap.
#include <cstdio>

#include "ifl/report.hpp"
#include "ifl/repsim.hpp"
#include "ifl/steer.hpp"

using ifl::langid::CanonicalLanguage;

namespace {

ifl::steer::ToyLmConfig trace_config(std::uint64_t seed) {
  auto config = ifl::steer::default_toy_config(/*depth=*/10, seed);
  // weaker planted gain + larger embedding noise, so the representation mix
  // actually evolves with depth and the grid shows a band
  config.embed_noise = 1.0;
  config.direction_gain = 0.3;
  config.amplifier_gain = 0.15;
  return config;
}

}  // namespace

int main() {
  const auto model_a = ifl::steer::build_toy_lm(trace_config(102));
  const auto model_b = ifl::steer::build_toy_lm(trace_config(202));

  std::vector<ifl::steer::TokenId> prompt;
  for (auto lang : {CanonicalLanguage::english, CanonicalLanguage::german,
                    CanonicalLanguage::chinese, CanonicalLanguage::spanish}) {
    const auto part = ifl::steer::make_prompt(model_a.config, lang, 6);
    prompt.insert(prompt.end(), part.begin(), part.end());
  }

  const auto grid = ifl::repsim::cka_grid(ifl::steer::export_traces(model_a, prompt, "a"),
                                          ifl::steer::export_traces(model_b, prompt, "b"));
  ifl::io::emit_cka_svg(grid, "cka_demo.svg");
  std::printf("wrote cka_demo.svg (%zux%zu grid)\n", grid.layers_a, grid.layers_b);
  return 0;
}
