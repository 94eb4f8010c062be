#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "nudg/linalg.hpp"

namespace nudg {

enum class Domain { kId, kOod };

std::string_view to_string(Domain d) noexcept;
Domain parse_domain(std::string_view s);

/// Two-dimensional task: x1 carries the label exactly, x2 agrees with the
/// label w.p. flip_prob on ID and w.p. 1 - flip_prob on OOD.
struct Synthetic2dSpec {
  double flip_prob = 0.7;
  Domain domain = Domain::kId;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Theory distribution: coordinates [0, r) are invariant (z ~ U[0,1]),
/// coordinates [r, d) are environmental (z ~ D_gamma on ID, D_-gamma on OOD).
struct TheorySpec {
  std::size_t r = 49;
  std::size_t d = 300;
  double gamma = 0.45;
  Domain domain = Domain::kId;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool allow_out_of_regime = false;

  /// 3/sqrt(r) < gamma < 1/2.
  bool in_regime() const noexcept;
  /// Structural checks always; the gamma regime only without the override.
  void validate() const;
  /// Environmental-coordinate mean for this spec's domain.
  double env_gamma() const noexcept { return domain == Domain::kId ? gamma : -gamma; }
};

struct SampleBatch {
  Matrix inputs;            // n x d_in
  std::vector<int> labels;  // +1 / -1
  Domain domain = Domain::kId;

  std::size_t size() const noexcept { return labels.size(); }
};

/// n draws from D_gamma: U[0,1] w.p. 1/2 + gamma, U[-1,0] w.p. 1/2 - gamma.
std::vector<double> sample_d_gamma(double gamma, std::size_t n, std::uint64_t seed);

SampleBatch sample_synthetic2d(const Synthetic2dSpec& spec);

SampleBatch sample_theory(const TheorySpec& spec);

/// Streams sample `index` of the theory distribution without materializing a
/// batch: fills `z` (size d) with the label-recovered latents z_j = x_j * y and
/// returns y. sample_theory(spec).row(i) == z * y for the same index.
int draw_theory_sample(const TheorySpec& spec, std::size_t index, std::span<double> z);

/// CSV with header x0,...,x{d-1},y,domain and 17 significant digits.
void write_batch_csv(std::ostream& out, const SampleBatch& batch);

}  // namespace nudg
