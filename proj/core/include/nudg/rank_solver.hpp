#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "nudg/models.hpp"
#include "nudg/trainer.hpp"

namespace nudg {

enum class SupportStrategy {
  kAuto,        // exhaustive when d <= exhaustive_max_d, else greedy
  kOracle,      // caller-supplied support
  kExhaustive,  // every support of size b_rank
  kGreedy,      // forward selection by risk decrease
  kIht,         // iterative hard thresholding, then refit on the support
};

std::string_view to_string(SupportStrategy s) noexcept;
SupportStrategy parse_support_strategy(std::string_view s);

struct RankSolveOptions {
  SupportStrategy strategy = SupportStrategy::kAuto;
  std::vector<std::size_t> oracle_support;
  std::size_t exhaustive_max_d = 20;
  /// Safeguarded Newton iterations of the one-coordinate search that scores
  /// a greedy candidate by the risk it reaches.
  std::size_t greedy_probe_iters = 1;
  std::size_t iht_steps = 200;
};

struct RankResult {
  TrainResult train;                  // model carries the chosen support
  std::vector<std::size_t> support;   // sorted ascending
  SupportStrategy strategy_used = SupportStrategy::kAuto;
  std::size_t supports_evaluated = 0;
};

/// Minimizes the plain risk subject to ||w||_0 <= b_rank over a theory batch.
/// Each candidate support is trained from zero (greedy warm-starts) with
/// `config`; the result is the lowest risk reached.
RankResult train_rank_constrained(const SampleBatch& batch, const Objective& objective,
                                  const RankSolveOptions& options, const TrainConfig& config);

}  // namespace nudg
