#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inferno/nn/jet_batch.hpp"
#include "inferno/nn/mlp.hpp"
#include "inferno/statmodel/asimov.hpp"
#include "inferno/statmodel/benchmark.hpp"
#include "inferno/synthgen/dataset.hpp"

namespace inferno::train {

struct TrainConfig {
  enum class Loss { inferno, cross_entropy };
  Loss loss = Loss::inferno;
  int benchmark_id = 2;
  double learning_rate = 1e-6;  // 1e-3 for the classifier
  int batch_size = 2000;        // 64 for the classifier; must be even
  int epochs = 200;
  double tau = 0.1;  // 1.0 for the classifier
  int output_dim = 10;
  std::uint64_t seed = 0;
  statmodel::ThetaPoint theta_s{};
  int validation_subsample = 10'000;  // per component, for the epoch metric
  int divergence_patience = 50;       // consecutive flagged steps before abort

  void validate() const {
    if (learning_rate <= 0.0) throw std::domain_error("TrainConfig: learning rate must be > 0");
    if (batch_size <= 0 || batch_size % 2 != 0)
      throw std::domain_error("TrainConfig: batch size must be positive and even");
    if (epochs < 0) throw std::domain_error("TrainConfig: epochs must be >= 0");
  }
};

struct TrainTrace {
  std::vector<double> step_loss;
  std::vector<double> epoch_validation;  // sqrt(U) or cross-entropy
  double wall_seconds = 0.0;
};

struct TrainResult {
  nn::MlpParams params;
  TrainTrace trace;
  bool diverged = false;
  std::string divergence_reason;
};

/// phi' = phi - gamma * gradient
void sgd_step(nn::MlpParams& params, const nn::MlpGrads& grads, double gamma);

/// U and its parameter gradient for one balanced mini-batch (Algorithm 1 body)
struct InfernoStep {
  double u = 0.0;
  bool warn = false;
};
InfernoStep inferno_loss_and_gradient(const nn::MlpParams& p,
                                      const statmodel::BenchmarkSpec& bench,
                                      const statmodel::ThetaPoint& theta_s,
                                      const Eigen::Ref<const synthgen::ObservationMatrix>& sig,
                                      const Eigen::Ref<const synthgen::ObservationMatrix>& bkg,
                                      double r0, double lambda0, nn::MlpGrads& grads);

/// U without gradients (validation metric and tests)
double inferno_loss_value(const nn::MlpParams& p, const statmodel::BenchmarkSpec& bench,
                          const statmodel::ThetaPoint& theta_s,
                          const Eigen::Ref<const synthgen::ObservationMatrix>& sig,
                          const Eigen::Ref<const synthgen::ObservationMatrix>& bkg, double r0,
                          double lambda0, bool* warn = nullptr);

/// full Asimov nll jet over the benchmark's free directions (theta-gradient
/// and Fisher live in the jet slots); exposed for stationarity checks
statmodel::Jet2<double> asimov_nll_jets(const nn::MlpParams& p,
                                        const statmodel::BenchmarkSpec& bench,
                                        const statmodel::ThetaPoint& at,
                                        const Eigen::Ref<const synthgen::ObservationMatrix>& sig,
                                        const Eigen::Ref<const synthgen::ObservationMatrix>& bkg,
                                        double r0, double lambda0);

TrainResult train_inferno(const TrainConfig& cfg, const statmodel::BenchmarkSpec& bench,
                          const synthgen::LabeledDataset& train_set,
                          const synthgen::LabeledDataset& valid_set);

TrainResult train_classifier(const TrainConfig& cfg, const synthgen::LabeledDataset& train_set,
                             const synthgen::LabeledDataset& valid_set);

}  // namespace inferno::train
