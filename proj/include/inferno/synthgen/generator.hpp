#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "inferno/common/rng.hpp"
#include "inferno/synthgen/dataset.hpp"

namespace inferno::synthgen {

/// f_s: (x0,x1) ~ N((1,1), I), x2 ~ Exp(rate 2)
LabeledDataset sample_signal(Eigen::Index count, std::uint64_t seed);

/// f_b: (x0,x1) ~ N((2+r,0), diag(5,9)), x2 ~ Exp(rate lambda); lambda > 0
LabeledDataset sample_background(Eigen::Index count, std::uint64_t seed, double r, double lambda);

/// In-place model of the nuisance parameters on a background batch generated
/// at (r0, lambda0): x0 += r - r0, x2 *= lambda0 / lambda.  Signal rows pass
/// through untouched.
void apply_nuisance_transform(LabeledDataset& batch, double r, double lambda);

/// Matrix-level transform of background observations only.
void apply_nuisance_transform(ObservationMatrix& bkg, double r0, double lambda0, double r,
                              double lambda);

/// Two-component mixture at (s, r, lambda, b): each observation is signal with
/// probability s/(s+b).  When n is unset the total count is Poisson(s+b).
LabeledDataset mixture_sample(std::optional<Eigen::Index> n, double s, double b, double r,
                              double lambda, std::uint64_t seed);

/// exact Poisson sampler (mean splitting + Knuth product method)
Eigen::Index poisson_draw(RandomStream& rng, double mean);

// dataset files
void write_csv(const std::string& path, const LabeledDataset& ds);
LabeledDataset read_csv(const std::string& path);
void write_binary(const std::string& path, const LabeledDataset& ds);
LabeledDataset read_binary(const std::string& path);

}  // namespace inferno::synthgen
