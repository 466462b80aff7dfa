#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "tskip/arch.hpp"
#include "tskip/tensor.hpp"

namespace tskip {

struct CandidateScore {
  ArchSpec spec;
  double score = 0.0;
  std::uint64_t seed = 0;
  std::size_t params = 0;
  /// Every spiking layer stayed silent on the probe batch.
  bool degenerate = false;
};

/// B x B kernel, row-major.
struct Kernel {
  std::size_t B = 0;
  std::vector<double> K;
  double at(std::size_t i, std::size_t j) const { return K[i * B + j]; }
};

inline constexpr double kSahdEpsilon = 1e-6;

/// Binary codes of one layer: [B, bits], one row per probe sample.
/// Adds, for every pair, the count of co-active bits divided by the layer's
/// total activity max(1, sum of all bits). Each layer term is a scaled Gram
/// matrix, so the kernel stays positive semi-definite.
void add_layer_codes(Kernel& k, const Tensor& codes);
Kernel sahd_kernel(const std::vector<Tensor>& layer_codes);

/// log det(K + eps I).
double kernel_logdet(const Kernel& k, double eps = kSahdEpsilon);
/// Smallest eigenvalue of K.
double kernel_min_eigenvalue(const Kernel& k);

/// Spike codes of every LIF layer for probe [T, B, ...] with weights
/// initialized from `seed`; batch statistics are used without touching the
/// running statistics.
std::vector<Tensor> probe_codes(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed);

/// Training-free score of an architecture at initialization.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual CandidateScore score(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed) const = 0;
};

class SahdScorer final : public Scorer {
 public:
  explicit SahdScorer(double eps = kSahdEpsilon) : eps_(eps) {}
  CandidateScore score(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed) const override;

 private:
  double eps_;
};

CandidateScore sahd_score(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed);

}  // namespace tskip
