#include "inferno/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "inferno/common/rng.hpp"

namespace inferno::nn {

MlpParams MlpParams::init(std::uint64_t seed, const std::vector<int>& widths, double tau) {
  if (widths.size() < 2) throw std::invalid_argument("MlpParams::init: need at least one layer");
  if (tau <= 0.0) throw std::domain_error("MlpParams::init: tau must be positive");
  RandomStream rng(seed, "init");
  MlpParams p;
  p.tau = tau;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd wl(out, in);
    for (Eigen::Index i = 0; i < wl.rows(); ++i)
      for (Eigen::Index j = 0; j < wl.cols(); ++j)
        wl(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    p.w.push_back(std::move(wl));
    p.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  MlpGrads g;
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    g.w.push_back(Eigen::MatrixXd::Zero(p.w[l].rows(), p.w[l].cols()));
    g.b.push_back(Eigen::VectorXd::Zero(p.b[l].size()));
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& m : w) m.setZero();
  for (auto& v : b) v.setZero();
}

double MlpGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& m : w) s += m.squaredNorm();
  for (const auto& v : b) s += v.squaredNorm();
  return s;
}

bool MlpGrads::all_finite() const {
  for (const auto& m : w)
    if (!m.allFinite()) return false;
  for (const auto& v : b)
    if (!v.allFinite()) return false;
  return true;
}

Eigen::MatrixXd logits(const MlpParams& p, const Eigen::Ref<const synthgen::ObservationMatrix>& x) {
  if (!x.allFinite()) throw std::invalid_argument("logits: non-finite inputs");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    Eigen::MatrixXd z = h * p.w[l].transpose();
    z.rowwise() += p.b[l].transpose();
    if (l + 1 < p.w.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z, double tau) {
  if (tau <= 0.0) throw std::domain_error("softmax_rows: tau must be positive");
  Eigen::MatrixXd u = z / tau;
  const Eigen::VectorXd rowmax = u.rowwise().maxCoeff();
  u.colwise() -= rowmax;
  Eigen::MatrixXd e = u.array().exp().matrix();
  const Eigen::VectorXd norm = e.rowwise().sum();
  e.array().colwise() /= norm.array();
  return e;
}

double cross_entropy(const Eigen::MatrixXd& probs, std::span<const std::uint8_t> labels) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    loss -= std::log(std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-300));
  return loss / static_cast<double>(probs.rows());
}

double cross_entropy_step(const MlpParams& p,
                          const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                          std::span<const std::uint8_t> labels, MlpGrads& grads) {
  const Eigen::Index n = x.rows();
  const std::size_t layers = p.w.size();

  // forward, keeping activations
  std::vector<Eigen::MatrixXd> act(layers + 1);
  act[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = act[l] * p.w[l].transpose();
    z.rowwise() += p.b[l].transpose();
    if (l + 1 < layers) z = z.cwiseMax(0.0);
    act[l + 1] = std::move(z);
  }
  const Eigen::MatrixXd probs = softmax_rows(act[layers], p.tau);
  const double loss = cross_entropy(probs, labels);

  // delta at logits: (p - onehot) / (n * tau)
  Eigen::MatrixXd delta = probs;
  for (Eigen::Index i = 0; i < n; ++i) delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta /= static_cast<double>(n) * p.tau;

  for (std::size_t l = layers; l-- > 0;) {
    grads.w[l].noalias() = delta.transpose() * act[l];
    grads.b[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * p.w[l];
      // relu mask from the stored activation
      delta = (act[l].array() > 0.0).cast<double>() * back.array();
    }
  }
  return loss;
}

}  // namespace inferno::nn
