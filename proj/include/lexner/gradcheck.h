#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lexner/tagger.h"

namespace lexner {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Entries probed per block; 0 probes every entry.
  std::size_t samples_per_block = 0;
  std::uint64_t seed = 1;
  // Test hook: scales the analytic gradient of this block by 1.01.
  std::string corrupt_block;
};

struct BlockCheck {
  std::string name;
  std::size_t probed = 0;
  double max_abs_error = 0;
  // max |analytic - numeric| / max(max |analytic|, max |numeric|) over the
  // probed entries; 0 when both are identically zero.
  double rel_error = 0;
};

struct GradcheckResult {
  std::vector<BlockCheck> blocks;
  double max_rel_error = 0;
  bool passed = false;
};

// Compares nll_and_gradients (no dropout) against central differences of the
// summed NLL, block by block. `model` is perturbed and restored in place.
GradcheckResult gradcheck(TaggerModel& model, std::span<const EncodedSentence> batch,
                          const GradcheckOptions& options = {});

std::string format_gradcheck(const GradcheckResult& result);

}  // namespace lexner
