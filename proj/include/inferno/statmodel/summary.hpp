#pragma once

#include <Eigen/Core>

namespace inferno::statmodel {

/// histogram statistic built from per-observation network outputs
struct SummaryCounts {
  Eigen::VectorXd counts;
  double total = 0.0;
  bool soft = false;
  double tau = 0.0;
};

/// argmax tally per output index; ties resolve to the lowest index
SummaryCounts hard_summary(const Eigen::MatrixXd& logits);

/// column sums of tempered-softmax probabilities (tau > 0)
SummaryCounts soft_summary(const Eigen::MatrixXd& logits, double tau);

}  // namespace inferno::statmodel
