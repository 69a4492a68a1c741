#include "lexner/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace lexner {

namespace {

double batch_loss(const TaggerModel& model, std::span<const EncodedSentence> batch) {
  double loss = 0;
  for (const auto& s : batch) loss += sentence_nll(model, s, nullptr, nullptr);
  return loss;
}

}  // namespace

GradcheckResult gradcheck(TaggerModel& model, std::span<const EncodedSentence> batch,
                          const GradcheckOptions& options) {
  std::vector<const EncodedSentence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  BatchGradients analytic = nll_and_gradients_serial(model, ptrs, {});

  GradcheckResult result;
  Rng rng(options.seed);
  auto params = model.params.tensors();
  auto grads = analytic.grads.tensors();
  for (std::size_t b = 0; b < params.size(); ++b) {
    Eigen::MatrixXd& p = *params[b].second;
    Eigen::MatrixXd& g = *grads[b].second;
    if (p.size() == 0) continue;
    if (params[b].first == options.corrupt_block) g *= 1.01;

    std::vector<Eigen::Index> entries(static_cast<std::size_t>(p.size()));
    std::iota(entries.begin(), entries.end(), Eigen::Index{0});
    if (options.samples_per_block > 0 && options.samples_per_block < entries.size()) {
      for (std::size_t i = 0; i < options.samples_per_block; ++i) {
        std::swap(entries[i], entries[i + rng.below(entries.size() - i)]);
      }
      entries.resize(options.samples_per_block);
    }

    BlockCheck check;
    check.name = params[b].first;
    double max_a = 0, max_n = 0;
    for (Eigen::Index k : entries) {
      double& x = p.data()[k];
      const double saved = x;
      x = saved + options.step;
      const double up = batch_loss(model, batch);
      x = saved - options.step;
      const double down = batch_loss(model, batch);
      x = saved;
      const double numeric = (up - down) / (2 * options.step);
      const double a = g.data()[k];
      check.max_abs_error = std::max(check.max_abs_error, std::abs(a - numeric));
      max_a = std::max(max_a, std::abs(a));
      max_n = std::max(max_n, std::abs(numeric));
    }
    check.probed = entries.size();
    const double scale = std::max(max_a, max_n);
    check.rel_error = scale > 0 ? check.max_abs_error / scale : 0.0;
    result.max_rel_error = std::max(result.max_rel_error, check.rel_error);
    result.blocks.push_back(std::move(check));
  }
  result.passed = result.max_rel_error <= options.tolerance;
  return result;
}

std::string format_gradcheck(const GradcheckResult& result) {
  std::string out;
  char line[160];
  for (const auto& b : result.blocks) {
    std::snprintf(line, sizeof line, "%-14s probed %7zu  max_abs %.3e  rel %.3e\n",
                  b.name.c_str(), b.probed, b.max_abs_error, b.rel_error);
    out += line;
  }
  std::snprintf(line, sizeof line, "max relative error %.3e: %s\n", result.max_rel_error,
                result.passed ? "PASS" : "FAIL");
  out += line;
  return out;
}

}  // namespace lexner
