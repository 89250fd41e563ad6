#pragma once

#include <Eigen/Core>
#include <vector>

#include "inferno/autodiff/jet.hpp"
#include "inferno/nn/mlp.hpp"
#include "inferno/synthgen/dataset.hpp"

namespace inferno::nn {

/// nuisance directions that enter through the input transform
enum class NuisanceDir : int { shift_r = 0, rate_lambda = 1 };

/// slot layout of a batched second-order jet: slot 0 is the value, then one
/// slot per direction, then the packed symmetric second-order block (same
/// packing as autodiff::Jet2)
struct JetLayout {
  std::vector<NuisanceDir> dirs;

  int n_dirs() const { return static_cast<int>(dirs.size()); }
  int n_slots() const {
    const int d = n_dirs();
    return 1 + d + d * (d + 1) / 2;
  }
  int g_slot(int i) const { return 1 + i; }
  int h_slot(int i, int j) const {
    return 1 + n_dirs() + (i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i);
  }
  bool operator==(const JetLayout&) const = default;
};

/// batch of per-observation jets: one (n x width) matrix per slot
struct JetBatch {
  JetLayout layout;
  std::vector<Eigen::MatrixXd> s;

  Eigen::Index rows() const { return s.empty() ? 0 : s.front().rows(); }
  Eigen::Index cols() const { return s.empty() ? 0 : s.front().cols(); }

  static JetBatch zeros(const JetLayout& layout, Eigen::Index n, Eigen::Index width) {
    JetBatch out;
    out.layout = layout;
    out.s.assign(static_cast<std::size_t>(layout.n_slots()), Eigen::MatrixXd::Zero(n, width));
    return out;
  }
};

/// jets of a background batch generated at (r0, lambda0), evaluated at
/// (r_at, lambda_at): x0 -> x0 + (r - r0) and x2 -> x2 * lambda0 / lambda
JetBatch background_input_jets(const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                               const JetLayout& layout, double r0, double lambda0, double r_at,
                               double lambda_at);

/// plain observations as zero-tangent jets (signal lane)
JetBatch plain_input_jets(const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                          const JetLayout& layout);

/// forward intermediates kept for the parameter VJP
struct JetForwardCache {
  JetBatch input;
  std::vector<JetBatch> hidden;           // post-relu activations per hidden layer
  std::vector<Eigen::ArrayXXd> mask;      // relu masks per hidden layer
  JetBatch u;                             // logits / tau
  Eigen::MatrixXd p;                      // softmax of u value slot
  std::vector<Eigen::MatrixXd> c;         // per dir: a_dir - <p,a_dir> 1
  std::vector<Eigen::VectorXd> s_dot;     // per dir: <p, a_dir>
  std::vector<Eigen::MatrixXd> c_d;       // per pair: d - <p,d> 1
  std::vector<Eigen::VectorXd> t;         // per pair: <p, a_a.a_b> - s_a s_b
};

/// tempered-softmax probabilities with full second-order structure in the
/// input-transform directions
JetBatch mlp_forward_jets(const MlpParams& p, const JetBatch& input, JetForwardCache* cache);

/// per-bin column sums of the probability jets
std::vector<autodiff::Jet2d> aggregate_bins(const JetBatch& probs);

/// accumulate d<W, aggregate>/d(params) into grads, where W holds one row
/// vector (length b) of adjoints per slot
void mlp_vjp_jets(const MlpParams& p, const JetForwardCache& cache,
                  const std::vector<Eigen::RowVectorXd>& w_slots, MlpGrads& grads);

}  // namespace inferno::nn
