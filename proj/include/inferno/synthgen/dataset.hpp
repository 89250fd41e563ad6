#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace inferno::synthgen {

/// observations are rows (x0, x1, x2); x2 >= 0 (exponential dimension)
using ObservationMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

constexpr std::uint8_t kBackgroundLabel = 0;
constexpr std::uint8_t kSignalLabel = 1;

struct LabeledDataset {
  ObservationMatrix x;
  std::vector<std::uint8_t> labels;
  double r0 = 0.0;       // background mean shift at generation
  double lambda0 = 3.0;  // background exponential rate at generation
  std::uint64_t seed = 0;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index signal_count() const {
    Eigen::Index n = 0;
    for (auto l : labels) n += (l == kSignalLabel);
    return n;
  }
  Eigen::Index background_count() const { return size() - signal_count(); }

  /// row-views of one component's observations
  ObservationMatrix component(std::uint8_t label) const {
    ObservationMatrix out(label == kSignalLabel ? signal_count() : background_count(), 3);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < size(); ++i)
      if (labels[static_cast<std::size_t>(i)] == label) out.row(r++) = x.row(i);
    return out;
  }
};

struct GeneratorConfig {
  double r0 = 0.0;
  double lambda0 = 3.0;
  Eigen::Index signal_count = 0;
  Eigen::Index background_count = 0;
  std::uint64_t seed = 0;
};

}  // namespace inferno::synthgen
