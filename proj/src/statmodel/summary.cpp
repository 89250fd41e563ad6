#include "inferno/statmodel/summary.hpp"

#include "inferno/nn/mlp.hpp"

namespace inferno::statmodel {

SummaryCounts hard_summary(const Eigen::MatrixXd& logits) {
  SummaryCounts out;
  out.counts = Eigen::VectorXd::Zero(logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    double best = logits(i, 0);
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > best) {  // strict: ties stay at the lowest index
        best = logits(i, j);
        arg = j;
      }
    out.counts(arg) += 1.0;
  }
  out.total = static_cast<double>(logits.rows());
  return out;
}

SummaryCounts soft_summary(const Eigen::MatrixXd& logits, double tau) {
  SummaryCounts out;
  out.counts = nn::softmax_rows(logits, tau).colwise().sum().transpose();
  out.total = static_cast<double>(logits.rows());
  out.soft = true;
  out.tau = tau;
  return out;
}

}  // namespace inferno::statmodel
