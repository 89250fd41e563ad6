#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "inferno/autodiff/jet.hpp"
#include "inferno/autodiff/tape.hpp"
#include "inferno/synthgen/dataset.hpp"

namespace inferno::nn {

/// weights of the 3 -> 100 -> 100 -> b network plus the softmax temperature
struct MlpParams {
  std::vector<Eigen::MatrixXd> w;  // (out x in) per layer
  std::vector<Eigen::VectorXd> b;
  double tau = 1.0;

  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }
  std::vector<int> widths() const {
    std::vector<int> out{input_dim()};
    for (const auto& m : w) out.push_back(static_cast<int>(m.rows()));
    return out;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w.size(); ++l)
      n += static_cast<std::size_t>(w[l].size()) + static_cast<std::size_t>(b[l].size());
    return n;
  }

  /// uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, deterministic in seed
  static MlpParams init(std::uint64_t seed, const std::vector<int>& widths, double tau);
};

/// gradient (or update) buffer with the same shapes as MlpParams
struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static MlpGrads zeros_like(const MlpParams& p);
  void set_zero();
  double squared_norm() const;
  bool all_finite() const;
};

/// raw logits for a batch of observations (rows), shape n x b
Eigen::MatrixXd logits(const MlpParams& p, const Eigen::Ref<const synthgen::ObservationMatrix>& x);

/// tempered softmax per row with max-subtraction; tau > 0
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z, double tau);

/// mean negative log true-class probability; labels index columns of probs
double cross_entropy(const Eigen::MatrixXd& probs, std::span<const std::uint8_t> labels);

/// cross-entropy loss and parameter gradients in one fused pass (tau = 1)
double cross_entropy_step(const MlpParams& p,
                          const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                          std::span<const std::uint8_t> labels, MlpGrads& grads);

// ---------------------------------------------------------------------------
// generic-scalar forward: the slow reference lane used by tests and the
// full-graph oracle (S = double, Var, Jet2<double> or Jet2<Var>)
// ---------------------------------------------------------------------------

template <class S>
struct GenericMlp {
  std::vector<std::vector<S>> w;  // row-major (out x in)
  std::vector<std::vector<S>> b;
  std::vector<int> widths;
  double tau = 1.0;
};

/// lift double parameters into scalar type S (S(double) must exist)
template <class S>
GenericMlp<S> lift(const MlpParams& p) {
  GenericMlp<S> g;
  g.tau = p.tau;
  g.widths = p.widths();
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    std::vector<S> wl(static_cast<std::size_t>(p.w[l].size()));
    for (Eigen::Index i = 0; i < p.w[l].rows(); ++i)
      for (Eigen::Index j = 0; j < p.w[l].cols(); ++j)
        wl[static_cast<std::size_t>(i * p.w[l].cols() + j)] = S(p.w[l](i, j));
    std::vector<S> bl(static_cast<std::size_t>(p.b[l].size()));
    for (Eigen::Index i = 0; i < p.b[l].size(); ++i) bl[static_cast<std::size_t>(i)] = S(p.b[l](i));
    g.w.push_back(std::move(wl));
    g.b.push_back(std::move(bl));
  }
  return g;
}

template <class S>
std::vector<S> forward_generic(const GenericMlp<S>& net, std::span<const S> x) {
  using autodiff::relu;
  std::vector<S> h(x.begin(), x.end());
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    const auto in = static_cast<std::size_t>(net.widths[l]);
    const auto out = static_cast<std::size_t>(net.widths[l + 1]);
    std::vector<S> z(out);
    for (std::size_t i = 0; i < out; ++i) {
      S acc = net.b[l][i];
      for (std::size_t j = 0; j < in; ++j) acc = acc + net.w[l][i * in + j] * h[j];
      z[i] = acc;
    }
    if (l + 1 < net.w.size())
      for (auto& v : z) v = relu(v);
    h = std::move(z);
  }
  return h;
}

template <class S>
std::vector<S> softmax_generic(std::span<const S> z, double tau) {
  using autodiff::exp;
  using std::exp;
  double zmax = autodiff::value_of(z[0]);
  for (const S& v : z) zmax = std::max(zmax, autodiff::value_of(v));
  std::vector<S> e(z.size());
  S total = S(0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = exp((z[i] - zmax) * (1.0 / tau));
    total = total + e[i];
  }
  for (auto& v : e) v = v / total;
  return e;
}

}  // namespace inferno::nn
