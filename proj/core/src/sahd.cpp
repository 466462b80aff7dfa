#include "tskip/sahd.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "tskip/error.hpp"
#include "tskip/network.hpp"

namespace tskip {
namespace {

Eigen::MatrixXd to_eigen(const Kernel& k) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k.B), static_cast<Eigen::Index>(k.B));
  for (std::size_t i = 0; i < k.B; ++i)
    for (std::size_t j = 0; j < k.B; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k.at(i, j);
  return m;
}

}  // namespace

void add_layer_codes(Kernel& k, const Tensor& codes) {
  if (codes.rank() != 2) throw DimensionError("layer codes must be [batch, bits]");
  const std::size_t B = codes.dim(0), D = codes.dim(1);
  if (k.B == 0) {
    k.B = B;
    k.K.assign(B * B, 0.0);
  }
  if (k.B != B) throw DimensionError("layer codes disagree on batch size");
  double total = 0.0;
  for (double v : codes.data()) total += v != 0.0 ? 1.0 : 0.0;
  const double norm = std::max(1.0, total);
  const double* c = codes.data().data();
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = i; j < B; ++j) {
      std::size_t shared = 0;
      for (std::size_t d = 0; d < D; ++d) shared += (c[i * D + d] != 0.0) & (c[j * D + d] != 0.0);
      const double v = static_cast<double>(shared) / norm;
      k.K[i * B + j] += v;
      if (i != j) k.K[j * B + i] += v;
    }
}

Kernel sahd_kernel(const std::vector<Tensor>& layer_codes) {
  Kernel k;
  for (const auto& c : layer_codes) add_layer_codes(k, c);
  return k;
}

double kernel_logdet(const Kernel& k, double eps) {
  if (k.B == 0) throw DimensionError("empty kernel");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(k), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i) + eps;
    if (!(lam > 0.0)) throw NumericError("kernel is not positive definite after regularization");
    s += std::log(lam);
  }
  return s;
}

double kernel_min_eigenvalue(const Kernel& k) {
  if (k.B == 0) throw DimensionError("empty kernel");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(k), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<Tensor> probe_codes(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed) {
  if (probe.rank() < 3 || probe.dim(1) < 2) throw DimensionError("probe batch must be [T, B >= 2, ...]");
  Network net(spec, seed);
  Tape tape;
  ForwardOptions opts;
  opts.mode = RunMode::Train;
  opts.update_running_stats = false;
  const auto fwd = run_forward(net, tape, probe, opts);
  const std::size_t B = probe.dim(1);
  std::vector<Tensor> codes;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    if (spec.layers[l].activation != Activation::Lif) continue;
    const std::size_t per = net.geometry()[l].neurons;
    Tensor c({B, spec.T * per}, 0.0);
    for (std::size_t t = 0; t < spec.T; ++t) {
      const auto v = tape.value(fwd.layer_outputs[l][t]).data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < per; ++n) c[b * spec.T * per + t * per + n] = v[b * per + n] > 0.0 ? 1.0 : 0.0;
    }
    codes.push_back(std::move(c));
  }
  return codes;
}

CandidateScore SahdScorer::score(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed) const {
  const auto codes = probe_codes(spec, probe, seed);
  Kernel k;
  k.B = probe.dim(1);
  k.K.assign(k.B * k.B, 0.0);
  bool silent = true;
  for (const auto& c : codes) {
    add_layer_codes(k, c);
    for (double v : c.data())
      if (v != 0.0) {
        silent = false;
        break;
      }
  }
  CandidateScore r;
  r.spec = spec;
  r.seed = seed;
  r.params = param_count(spec);
  r.score = kernel_logdet(k, eps_);
  r.degenerate = silent;
  return r;
}

CandidateScore sahd_score(const ArchSpec& spec, const Tensor& probe, std::uint64_t seed) {
  return SahdScorer().score(spec, probe, seed);
}

}  // namespace tskip
