// Minimal end-to-end example: build the toy decoder, compute a language
// attribute from one prompt pair, and watch greedy generation flip language.
#include <cstdio>

#include "ifl/steer.hpp"

using ifl::langid::CanonicalLanguage;

int main() {
  const auto config = ifl::steer::default_toy_config(/*depth=*/30, /*seed=*/0);
  const auto model = ifl::steer::build_toy_lm(config);

  const auto english = ifl::steer::make_prompt(config, CanonicalLanguage::english, 6);
  const auto german = ifl::steer::make_prompt(config, CanonicalLanguage::german, 6);
  const auto attribute = ifl::steer::compute_language_attribute(model, german, english);
  std::printf("attribute injected at layer %zu of %zu\n", attribute.layer, config.depth);

  for (double alpha : {0.0, 0.5, 1.0}) {
    auto scaled = attribute;
    scaled.scale = alpha;
    const auto generated = ifl::steer::apply_steering(model, english, scaled, 24);
    std::printf("alpha %.1f: english %.3f, german %.3f\n", alpha,
                ifl::steer::toy_fidelity(generated, CanonicalLanguage::english, config),
                ifl::steer::toy_fidelity(generated, CanonicalLanguage::german, config));
  }
  return 0;
}
