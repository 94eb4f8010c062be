#include "nudg/rank_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "nudg/error.hpp"
#include "nudg/losses.hpp"

namespace nudg {

namespace {

TrainResult fit_support(const SampleBatch& batch, const Objective& objective, std::vector<std::size_t> support,
                        std::vector<double> w, const TrainConfig& config) {
  TheoryModel model{std::move(w), std::move(support)};
  return train(model, batch, objective, config);
}

bool lexicographic_next(std::vector<std::size_t>& c, std::size_t d) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < d - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

RankResult solve_exhaustive(const SampleBatch& batch, const Objective& objective, const RankSolveOptions& options,
                            const TrainConfig& config) {
  const std::size_t d = batch.inputs.cols();
  const std::size_t k = objective.b_rank;
  if (d > options.exhaustive_max_d) {
    throw ValidationError("exhaustive support search refused for d=" + std::to_string(d) + " > " +
                          std::to_string(options.exhaustive_max_d));
  }
  std::vector<std::size_t> combo(k);
  std::iota(combo.begin(), combo.end(), 0);
  std::optional<RankResult> best;
  std::size_t count = 0;
  do {
    TrainResult r = fit_support(batch, objective, combo, std::vector<double>(d, 0.0), config);
    ++count;
    if (!best || r.final_risk < best->train.final_risk) {
      best.emplace(RankResult{std::move(r), combo, SupportStrategy::kExhaustive, 0});
    }
  } while (lexicographic_next(combo, d));
  best->supports_evaluated = count;
  return std::move(*best);
}

// Best risk reachable by moving one coordinate of a fixed model: a safeguarded
// Newton search on t -> mean l(m_i + t z_ij).
double probe_coordinate(std::span<const double> margins, std::span<const double> column, double base,
                        std::size_t iters) {
  const double n = static_cast<double>(margins.size());
  auto value = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) s += logistic(margins[i] + t * column[i]);
    return s / n;
  };
  double t = 0.0;
  double f = base;
  for (std::size_t it = 0; it < iters; ++it) {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
      const double m = margins[i] + t * column[i];
      g += logistic_prime(m) * column[i];
      h += logistic_second(m) * column[i] * column[i];
    }
    g /= n;
    h /= n;
    if (g == 0.0) break;
    double step = h > 0.0 ? -g / h : -g;
    bool improved = false;
    for (int halvings = 0; halvings < 40; ++halvings, step *= 0.5) {
      const double ft = value(t + step);
      if (ft < f) {
        t += step;
        f = ft;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return f;
}

RankResult solve_greedy(const SampleBatch& batch, const Objective& objective, const RankSolveOptions& options,
                        const TrainConfig& config) {
  const std::size_t n = batch.size();
  const std::size_t d = batch.inputs.cols();
  // Column-major label-recovered latents: z[j*n + i] = y_i x_ij.
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = batch.inputs.row(i);
    for (std::size_t j = 0; j < d; ++j) z[j * n + i] = batch.labels[i] * xi[j];
  }

  std::vector<std::size_t> support;
  std::vector<double> w(d, 0.0);
  std::vector<double> margins(n, 0.0);
  std::vector<bool> chosen(d, false);
  std::optional<TrainResult> fitted;
  std::size_t evaluated = 0;
  for (std::size_t k = 0; k < objective.b_rank; ++k) {
    std::size_t best_j = d;
    double best_score = 0.0;
    double base = 0.0;
    for (double m : margins) base += logistic(m);
    base /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      if (chosen[j]) continue;
      const double score = probe_coordinate(margins, {z.data() + j * n, n}, base, options.greedy_probe_iters);
      ++evaluated;
      if (best_j == d || score < best_score) {
        best_j = j;
        best_score = score;
      }
    }
    chosen[best_j] = true;
    support.push_back(best_j);
    std::sort(support.begin(), support.end());
    fitted.emplace(fit_support(batch, objective, support, w, config));
    w = std::get<TheoryModel>(fitted->model).w;
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (std::size_t j : support) m += w[j] * z[j * n + i];
      margins[i] = m;
    }
  }
  return RankResult{std::move(*fitted), support, SupportStrategy::kGreedy, evaluated};
}

std::vector<std::size_t> top_magnitudes(std::span<const double> w, std::size_t k) {
  std::vector<std::size_t> idx(w.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(w[a]) > std::abs(w[b]); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RankResult solve_iht(const SampleBatch& batch, const Objective& objective, const RankSolveOptions& options,
                     const TrainConfig& config) {
  const std::size_t d = batch.inputs.cols();
  std::vector<double> w(d, 0.0);
  std::vector<std::size_t> support;
  const EvalOptions eval{config.chunks, false};
  for (std::size_t it = 0; it < options.iht_steps; ++it) {
    const Model current = TheoryModel{w, std::nullopt};
    const auto g = std::get<TheoryModel>(detail::evaluate_unchecked(current, batch, objective, eval, true).gradient).w;
    for (std::size_t j = 0; j < d; ++j) w[j] -= config.learning_rate * g[j];
    support = top_magnitudes(w, objective.b_rank);
    std::vector<double> kept(d, 0.0);
    for (std::size_t j : support) kept[j] = w[j];
    w = std::move(kept);
  }
  return RankResult{fit_support(batch, objective, support, w, config), support, SupportStrategy::kIht,
                    options.iht_steps};
}

}  // namespace

std::string_view to_string(SupportStrategy s) noexcept {
  switch (s) {
    case SupportStrategy::kAuto: return "auto";
    case SupportStrategy::kOracle: return "oracle";
    case SupportStrategy::kExhaustive: return "exhaustive";
    case SupportStrategy::kGreedy: return "greedy";
    case SupportStrategy::kIht: return "iht";
  }
  return "?";
}

SupportStrategy parse_support_strategy(std::string_view s) {
  for (auto v : {SupportStrategy::kAuto, SupportStrategy::kOracle, SupportStrategy::kExhaustive,
                 SupportStrategy::kGreedy, SupportStrategy::kIht}) {
    if (s == to_string(v)) return v;
  }
  throw ValidationError("unknown support strategy '" + std::string(s) + "'");
}

RankResult train_rank_constrained(const SampleBatch& batch, const Objective& objective,
                                  const RankSolveOptions& options, const TrainConfig& config) {
  if (objective.kind != ObjectiveKind::kErmRank) throw ValidationError("train_rank_constrained needs ERM-RANK");
  const std::size_t d = batch.inputs.cols();
  check_compatible(TheoryModel{std::vector<double>(d, 0.0), std::nullopt}, objective, d);
  config.validate();

  SupportStrategy strategy = options.strategy;
  if (strategy == SupportStrategy::kAuto) {
    strategy = d <= options.exhaustive_max_d ? SupportStrategy::kExhaustive : SupportStrategy::kGreedy;
  }
  switch (strategy) {
    case SupportStrategy::kOracle: {
      std::vector<std::size_t> support = options.oracle_support;
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      if (support.empty() || support.size() > objective.b_rank) {
        throw ValidationError("oracle support must be non-empty with at most b_rank entries");
      }
      TrainResult fitted = fit_support(batch, objective, support, std::vector<double>(d, 0.0), config);
      return RankResult{std::move(fitted), std::move(support), SupportStrategy::kOracle, 1};
    }
    case SupportStrategy::kExhaustive:
      return solve_exhaustive(batch, objective, options, config);
    case SupportStrategy::kGreedy:
      return solve_greedy(batch, objective, options, config);
    case SupportStrategy::kIht:
      return solve_iht(batch, objective, options, config);
    case SupportStrategy::kAuto:
      break;
  }
  throw ValidationError("unreachable support strategy");
}

}  // namespace nudg
