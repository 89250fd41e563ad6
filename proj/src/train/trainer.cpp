#include "inferno/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "inferno/common/rng.hpp"

namespace inferno::train {

using autodiff::Jet2;
using autodiff::Jet2d;
using autodiff::Jet2v;
using autodiff::Tape;
using autodiff::Var;
using nn::JetBatch;
using nn::JetForwardCache;
using nn::JetLayout;
using nn::MlpGrads;
using nn::MlpParams;
using nn::NuisanceDir;
using statmodel::BenchmarkSpec;
using statmodel::InputDirMap;
using statmodel::ThetaPoint;
using synthgen::ObservationMatrix;

void sgd_step(MlpParams& params, const MlpGrads& grads, double gamma) {
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    params.w[l] -= gamma * grads.w[l];
    params.b[l] -= gamma * grads.b[l];
  }
}

namespace {

/// input-transform directions needed by a benchmark
std::pair<JetLayout, InputDirMap> nuisance_dirs(const BenchmarkSpec& bench) {
  JetLayout layout;
  InputDirMap map;
  if (bench.free[statmodel::kR]) {
    layout.dirs.push_back(NuisanceDir::shift_r);
    map.params.push_back(statmodel::kR);
  }
  if (bench.free[statmodel::kLambda]) {
    layout.dirs.push_back(NuisanceDir::rate_lambda);
    map.params.push_back(statmodel::kLambda);
  }
  return {layout, map};
}

/// background aggregates as plain-double jets over the input directions
std::vector<Jet2d> bkg_aggregates(const MlpParams& p, const JetLayout& layout,
                                  const Eigen::Ref<const ObservationMatrix>& bkg, double r0,
                                  double lambda0, const ThetaPoint& at) {
  const JetBatch in = nn::background_input_jets(bkg, layout, r0, lambda0, at.r, at.lambda);
  return nn::aggregate_bins(nn::mlp_forward_jets(p, in, nullptr));
}

Eigen::VectorXd sig_aggregates(const MlpParams& p,
                               const Eigen::Ref<const ObservationMatrix>& sig) {
  const JetLayout plain;
  const JetBatch in = nn::plain_input_jets(sig, plain);
  JetBatch probs = nn::mlp_forward_jets(p, in, nullptr);
  return probs.s[0].colwise().sum().transpose();
}

}  // namespace

statmodel::Jet2<double> asimov_nll_jets(const MlpParams& p, const BenchmarkSpec& bench,
                                        const ThetaPoint& at,
                                        const Eigen::Ref<const ObservationMatrix>& sig,
                                        const Eigen::Ref<const ObservationMatrix>& bkg, double r0,
                                        double lambda0) {
  const auto [layout, map] = nuisance_dirs(bench);
  const Eigen::VectorXd sig_counts = sig_aggregates(p, sig);
  const std::vector<Jet2d> bkg_raw = bkg_aggregates(p, layout, bkg, r0, lambda0, at);

  const auto theta = statmodel::make_theta_jets<double>(bench, at);
  std::vector<double> sig_span(sig_counts.data(), sig_counts.data() + sig_counts.size());
  std::vector<Jet2d> bkg_emb;
  bkg_emb.reserve(bkg_raw.size());
  for (const auto& j : bkg_raw) bkg_emb.push_back(statmodel::embed_background_jet(j, map, bench));

  const auto expected = statmodel::expected_counts<double>(
      theta, sig_span, bkg_emb, static_cast<double>(sig.rows()), static_cast<double>(bkg.rows()));
  Jet2d nll = statmodel::asimov_nll<double>(expected);
  return statmodel::add_constraints(nll, theta, bench);
}

double inferno_loss_value(const MlpParams& p, const BenchmarkSpec& bench,
                          const ThetaPoint& theta_s,
                          const Eigen::Ref<const ObservationMatrix>& sig,
                          const Eigen::Ref<const ObservationMatrix>& bkg, double r0,
                          double lambda0, bool* warn) {
  const Jet2d nll = asimov_nll_jets(p, bench, theta_s, sig, bkg, r0, lambda0);
  const auto fisher = statmodel::fisher_information(nll, bench);
  if (warn) *warn = fisher.warn;
  return statmodel::inferno_loss(fisher);
}

InfernoStep inferno_loss_and_gradient(const MlpParams& p, const BenchmarkSpec& bench,
                                      const ThetaPoint& theta_s,
                                      const Eigen::Ref<const ObservationMatrix>& sig,
                                      const Eigen::Ref<const ObservationMatrix>& bkg, double r0,
                                      double lambda0, MlpGrads& grads) {
  const auto [layout, map] = nuisance_dirs(bench);
  const int slots = layout.n_slots();
  const Eigen::Index nbins = p.w.back().rows();

  // fast forward passes with caches for the parameter VJP
  const JetLayout plain;
  JetForwardCache sig_cache, bkg_cache;
  const JetBatch sig_probs =
      nn::mlp_forward_jets(p, nn::plain_input_jets(sig, plain), &sig_cache);
  const JetBatch bkg_probs = nn::mlp_forward_jets(
      p, nn::background_input_jets(bkg, layout, r0, lambda0, theta_s.r, theta_s.lambda),
      &bkg_cache);

  // tape over the aggregate slots
  Tape tape;
  std::vector<Var> sig_leaves(static_cast<std::size_t>(nbins));
  std::vector<double> sig_sums(static_cast<std::size_t>(nbins));
  for (Eigen::Index i = 0; i < nbins; ++i) {
    sig_sums[static_cast<std::size_t>(i)] = sig_probs.s[0].col(i).sum();
    sig_leaves[static_cast<std::size_t>(i)] =
        autodiff::make_leaf(tape, sig_sums[static_cast<std::size_t>(i)]);
  }
  // bkg leaves: per bin, one leaf per slot
  std::vector<std::vector<Var>> bkg_leaves(static_cast<std::size_t>(nbins));
  for (Eigen::Index bin = 0; bin < nbins; ++bin) {
    auto& per = bkg_leaves[static_cast<std::size_t>(bin)];
    per.reserve(static_cast<std::size_t>(slots));
    for (int sl = 0; sl < slots; ++sl)
      per.push_back(
          autodiff::make_leaf(tape, bkg_probs.s[static_cast<std::size_t>(sl)].col(bin).sum()));
  }

  const auto theta = statmodel::make_theta_jets<Var>(bench, theta_s);
  std::vector<Var> sig_span(sig_leaves.begin(), sig_leaves.end());
  std::vector<Jet2v> bkg_emb;
  bkg_emb.reserve(static_cast<std::size_t>(nbins));
  const int kin = layout.n_dirs();
  for (Eigen::Index bin = 0; bin < nbins; ++bin) {
    Jet2v raw;
    raw.k = kin;
    const auto& per = bkg_leaves[static_cast<std::size_t>(bin)];
    raw.v = per[0];
    for (int d = 0; d < kin; ++d) raw.g[static_cast<std::size_t>(d)] = per[static_cast<std::size_t>(layout.g_slot(d))];
    for (int i = 0; i < kin; ++i)
      for (int j = 0; j <= i; ++j) raw.hess(i, j) = per[static_cast<std::size_t>(layout.h_slot(i, j))];
    bkg_emb.push_back(statmodel::embed_background_jet(raw, map, bench));
  }

  const auto expected = statmodel::expected_counts<Var>(
      theta, sig_span, bkg_emb, static_cast<double>(sig.rows()), static_cast<double>(bkg.rows()));
  Jet2v nll = statmodel::asimov_nll<Var>(expected);
  nll = statmodel::add_constraints(nll, theta, bench);
  const auto fisher = statmodel::fisher_information(nll, bench);
  const Var u = statmodel::inferno_loss(fisher);

  // adjoints of the aggregates, then the matrix-level parameter VJP
  tape.backward(u.idx);
  std::vector<Eigen::RowVectorXd> w_sig(1, Eigen::RowVectorXd::Zero(nbins));
  for (Eigen::Index i = 0; i < nbins; ++i)
    w_sig[0](i) = tape.adjoint(sig_leaves[static_cast<std::size_t>(i)].idx);
  std::vector<Eigen::RowVectorXd> w_bkg(static_cast<std::size_t>(slots),
                                        Eigen::RowVectorXd::Zero(nbins));
  for (Eigen::Index bin = 0; bin < nbins; ++bin)
    for (int sl = 0; sl < slots; ++sl)
      w_bkg[static_cast<std::size_t>(sl)](bin) =
          tape.adjoint(bkg_leaves[static_cast<std::size_t>(bin)][static_cast<std::size_t>(sl)].idx);

  nn::mlp_vjp_jets(p, sig_cache, w_sig, grads);
  nn::mlp_vjp_jets(p, bkg_cache, w_bkg, grads);
  return {u.v, fisher.warn};
}

namespace {

/// balanced-epoch iterator: shuffled component indices, half a batch from each
struct BalancedBatches {
  std::vector<Eigen::Index> sig_idx, bkg_idx;
  Eigen::Index half = 0;
  Eigen::Index step = 0;

  BalancedBatches(const synthgen::LabeledDataset& ds, int batch_size, RandomStream& rng)
      : half(batch_size / 2) {
    for (Eigen::Index i = 0; i < ds.size(); ++i)
      (ds.labels[static_cast<std::size_t>(i)] == synthgen::kSignalLabel ? sig_idx : bkg_idx)
          .push_back(i);
    shuffle(sig_idx, rng);
    shuffle(bkg_idx, rng);
  }

  static void shuffle(std::vector<Eigen::Index>& v, RandomStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(rng.next_u64() % i)]);
  }

  Eigen::Index steps() const {
    const Eigen::Index n = std::min(sig_idx.size(), bkg_idx.size());
    return half > 0 ? n / half : 0;
  }

  void fill(const synthgen::LabeledDataset& ds, Eigen::Index t, ObservationMatrix& sig,
            ObservationMatrix& bkg) const {
    sig.resize(half, 3);
    bkg.resize(half, 3);
    for (Eigen::Index i = 0; i < half; ++i) {
      sig.row(i) = ds.x.row(sig_idx[static_cast<std::size_t>(t * half + i)]);
      bkg.row(i) = ds.x.row(bkg_idx[static_cast<std::size_t>(t * half + i)]);
    }
  }
};

ObservationMatrix component_head(const synthgen::LabeledDataset& ds, std::uint8_t label,
                                 Eigen::Index max_rows) {
  ObservationMatrix all = ds.component(label);
  const Eigen::Index n = std::min(max_rows, all.rows());
  return all.topRows(n);
}

}  // namespace

TrainResult train_inferno(const TrainConfig& cfg, const BenchmarkSpec& bench,
                          const synthgen::LabeledDataset& train_set,
                          const synthgen::LabeledDataset& valid_set) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> widths{3, 100, 100, cfg.output_dim};
  TrainResult res;
  res.params = MlpParams::init(cfg.seed, widths, cfg.tau);

  const ObservationMatrix vsig =
      component_head(valid_set, synthgen::kSignalLabel, cfg.validation_subsample);
  const ObservationMatrix vbkg =
      component_head(valid_set, synthgen::kBackgroundLabel, cfg.validation_subsample);

  RandomStream shuffle_rng(cfg.seed, "shuffle");
  MlpGrads grads = MlpGrads::zeros_like(res.params);
  int flagged = 0;
  ObservationMatrix sig, bkg;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    BalancedBatches batches(train_set, cfg.batch_size, shuffle_rng);
    for (Eigen::Index t = 0; t < batches.steps(); ++t) {
      batches.fill(train_set, t, sig, bkg);
      grads.set_zero();
      const InfernoStep step = inferno_loss_and_gradient(res.params, bench, cfg.theta_s, sig, bkg,
                                                         train_set.r0, train_set.lambda0, grads);
      const bool bad = !std::isfinite(step.u) || !grads.all_finite();
      if (bad || step.warn) {
        ++flagged;
        if (flagged >= cfg.divergence_patience) {
          res.diverged = true;
          res.divergence_reason = bad ? "non-finite loss or gradient" : "persistent ridge warnings";
          res.trace.wall_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          return res;
        }
        if (bad) continue;  // skip the update, keep the step counted
      } else {
        flagged = 0;
      }
      res.trace.step_loss.push_back(step.u);
      sgd_step(res.params, grads, cfg.learning_rate);
    }
    bool warn = false;
    const double u_val = inferno_loss_value(res.params, bench, cfg.theta_s, vsig, vbkg,
                                            valid_set.r0, valid_set.lambda0, &warn);
    res.trace.epoch_validation.push_back(std::sqrt(std::max(u_val, 0.0)));
  }
  res.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

TrainResult train_classifier(const TrainConfig& cfg, const synthgen::LabeledDataset& train_set,
                             const synthgen::LabeledDataset& valid_set) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> widths{3, 100, 100, cfg.output_dim};
  TrainResult res;
  res.params = MlpParams::init(cfg.seed, widths, cfg.tau);

  const ObservationMatrix vsig =
      component_head(valid_set, synthgen::kSignalLabel, cfg.validation_subsample);
  const ObservationMatrix vbkg =
      component_head(valid_set, synthgen::kBackgroundLabel, cfg.validation_subsample);
  ObservationMatrix vx(vsig.rows() + vbkg.rows(), 3);
  vx << vsig, vbkg;
  std::vector<std::uint8_t> vlab(static_cast<std::size_t>(vx.rows()), synthgen::kBackgroundLabel);
  for (Eigen::Index i = 0; i < vsig.rows(); ++i)
    vlab[static_cast<std::size_t>(i)] = synthgen::kSignalLabel;

  RandomStream shuffle_rng(cfg.seed, "shuffle");
  MlpGrads grads = MlpGrads::zeros_like(res.params);
  ObservationMatrix sig, bkg;
  ObservationMatrix batch(cfg.batch_size, 3);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(cfg.batch_size));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    BalancedBatches batches(train_set, cfg.batch_size, shuffle_rng);
    for (Eigen::Index t = 0; t < batches.steps(); ++t) {
      batches.fill(train_set, t, sig, bkg);
      batch.topRows(sig.rows()) = sig;
      batch.bottomRows(bkg.rows()) = bkg;
      for (int i = 0; i < cfg.batch_size; ++i)
        labels[static_cast<std::size_t>(i)] =
            i < cfg.batch_size / 2 ? synthgen::kSignalLabel : synthgen::kBackgroundLabel;
      grads.set_zero();
      const double loss = nn::cross_entropy_step(res.params, batch, labels, grads);
      if (!std::isfinite(loss) || !grads.all_finite()) {
        res.diverged = true;
        res.divergence_reason = "non-finite loss or gradient";
        res.trace.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
      }
      res.trace.step_loss.push_back(loss);
      sgd_step(res.params, grads, cfg.learning_rate);
    }
    const auto vprobs = nn::softmax_rows(nn::logits(res.params, vx), res.params.tau);
    res.trace.epoch_validation.push_back(nn::cross_entropy(vprobs, vlab));
  }
  res.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace inferno::train
