#include "nudg/sampler.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "nudg/csv.hpp"
#include "nudg/error.hpp"
#include "nudg/rng.hpp"

namespace nudg {

namespace {

// Purpose tags keep the streams of different samplers disjoint under one seed.
constexpr std::uint64_t kTagDGamma = 0x1;
constexpr std::uint64_t kTagSynthetic2d = 0x2;
constexpr std::uint64_t kTagTheory = 0x3;

rng::SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t tag, std::size_t index) {
  return rng::stream_for(rng::SplitMix64::mix(seed + tag), index);
}

double draw_d_gamma(rng::SplitMix64& g, double gamma) {
  const bool positive = g.uniform() < 0.5 + gamma;
  const double magnitude = g.uniform_open0();
  return positive ? magnitude : -magnitude;
}

int draw_label(rng::SplitMix64& g) { return g.uniform() < 0.5 ? 1 : -1; }

}  // namespace

std::string_view to_string(Domain d) noexcept { return d == Domain::kId ? "ID" : "OOD"; }

Domain parse_domain(std::string_view s) {
  if (s == "ID" || s == "id") return Domain::kId;
  if (s == "OOD" || s == "ood") return Domain::kOod;
  throw ValidationError("unknown domain '" + std::string(s) + "' (expected ID or OOD)");
}

void Synthetic2dSpec::validate() const {
  if (!(flip_prob > 0.5 && flip_prob < 1.0)) {
    throw ValidationError("synthetic2d: flip_prob must lie in (0.5, 1)");
  }
  if (n == 0) throw ValidationError("synthetic2d: n must be positive");
}

bool TheorySpec::in_regime() const noexcept {
  return r >= 1 && gamma > 3.0 / std::sqrt(static_cast<double>(r)) && gamma < 0.5;
}

void TheorySpec::validate() const {
  if (r < 1 || r >= d) throw ValidationError("theory: need 1 <= r < d");
  if (!(std::abs(gamma) < 0.5)) throw ValidationError("theory: need |gamma| < 1/2");
  if (n == 0) throw ValidationError("theory: n must be positive");
  if (!allow_out_of_regime && !in_regime()) {
    throw ValidationError("theory: gamma=" + std::to_string(gamma) + " outside (3/sqrt(r), 1/2) for r=" +
                          std::to_string(r) + "; pass the out-of-regime override to run anyway");
  }
}

std::vector<double> sample_d_gamma(double gamma, std::size_t n, std::uint64_t seed) {
  if (!(std::abs(gamma) < 0.5)) throw ValidationError("sample_d_gamma: need |gamma| < 1/2");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto g = sample_stream(seed, kTagDGamma, i);
    out[i] = draw_d_gamma(g, gamma);
  }
  return out;
}

SampleBatch sample_synthetic2d(const Synthetic2dSpec& spec) {
  spec.validate();
  const double agree_prob = spec.domain == Domain::kId ? spec.flip_prob : 1.0 - spec.flip_prob;
  SampleBatch batch{Matrix(spec.n, 2), std::vector<int>(spec.n), spec.domain};
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto g = sample_stream(spec.seed, kTagSynthetic2d, i);
    const int y = draw_label(g);
    const double x1 = g.uniform_open0() * y;
    const bool agrees = g.uniform() < agree_prob;
    const double x2 = g.uniform_open0() * (agrees ? y : -y);
    batch.inputs(i, 0) = x1;
    batch.inputs(i, 1) = x2;
    batch.labels[i] = y;
  }
  return batch;
}

int draw_theory_sample(const TheorySpec& spec, std::size_t index, std::span<double> z) {
  if (z.size() != spec.d) throw ValidationError("draw_theory_sample: output span must have size d");
  auto g = sample_stream(spec.seed, kTagTheory, index);
  const int y = draw_label(g);
  for (std::size_t j = 0; j < spec.r; ++j) z[j] = g.uniform_open0();
  const double env = spec.env_gamma();
  for (std::size_t j = spec.r; j < spec.d; ++j) z[j] = draw_d_gamma(g, env);
  return y;
}

SampleBatch sample_theory(const TheorySpec& spec) {
  spec.validate();
  SampleBatch batch{Matrix(spec.n, spec.d), std::vector<int>(spec.n), spec.domain};
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto row = batch.inputs.row(i);
    const int y = draw_theory_sample(spec, i, row);
    for (double& x : row) x *= y;
    batch.labels[i] = y;
  }
  return batch;
}

void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  const std::size_t d = batch.inputs.cols();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "y,domain\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (double x : batch.inputs.row(i)) out << csv::number(x) << ',';
    out << batch.labels[i] << ',' << to_string(batch.domain) << '\n';
  }
}

}  // namespace nudg
