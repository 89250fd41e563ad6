#pragma once

#include <span>
#include <vector>

#include "inferno/autodiff/jet.hpp"
#include "inferno/autodiff/small_matrix.hpp"
#include "inferno/statmodel/benchmark.hpp"

namespace inferno::statmodel {

using autodiff::Jet2;

/// theta as jets over the benchmark's free directions, evaluated at a point
template <class T>
struct ThetaJets {
  int k = 0;
  Jet2<T> s, r, lambda, b_rate;

  const Jet2<T>& param(int p) const {
    switch (p) {
      case kS: return s;
      case kR: return r;
      case kLambda: return lambda;
      default: return b_rate;
    }
  }
};

template <class T>
ThetaJets<T> make_theta_jets(const BenchmarkSpec& bench, const ThetaPoint& at) {
  ThetaJets<T> out;
  out.k = bench.n_free();
  auto lift = [&](int p) {
    const int d = bench.dir_of(p);
    return d >= 0 ? Jet2<T>::variable(out.k, d, T(at[p])) : Jet2<T>::constant(0, T(at[p]));
  };
  out.s = lift(kS);
  out.r = lift(kR);
  out.lambda = lift(kLambda);
  out.b_rate = lift(kBRate);
  return out;
}

/// order of the nuisance directions carried by a background aggregate
struct InputDirMap {
  std::vector<int> params;  // e.g. {kR, kLambda}
};

/// re-index an aggregate jet from input-transform directions to the
/// benchmark's free-parameter directions; slots of fixed parameters drop out
template <class T>
Jet2<T> embed_background_jet(const Jet2<T>& in, const InputDirMap& dirs,
                             const BenchmarkSpec& bench) {
  Jet2<T> out = Jet2<T>::constant(bench.n_free(), in.v);
  const int kin = static_cast<int>(dirs.params.size());
  std::vector<int> to(static_cast<std::size_t>(kin));
  for (int i = 0; i < kin; ++i) to[static_cast<std::size_t>(i)] = bench.dir_of(dirs.params[static_cast<std::size_t>(i)]);
  for (int i = 0; i < kin; ++i) {
    if (to[static_cast<std::size_t>(i)] < 0) continue;
    out.g[static_cast<std::size_t>(to[static_cast<std::size_t>(i)])] = in.g[static_cast<std::size_t>(i)];
    for (int j = 0; j <= i; ++j) {
      if (to[static_cast<std::size_t>(j)] < 0) continue;
      out.hess(to[static_cast<std::size_t>(i)], to[static_cast<std::size_t>(j)]) = in.hess(i, j);
    }
  }
  return out;
}

constexpr double kExpectationFloor = 1e-6;

/// per-bin expectation s * sig_i / g_sig + b_rate * bkg_i / g_bkg, floored at
/// 1e-6 so empty soft bins cannot reach the log
template <class T>
std::vector<Jet2<T>> expected_counts(const ThetaJets<T>& theta, std::span<const T> sig_counts,
                                     std::span<const Jet2<T>> bkg_counts, double g_sig,
                                     double g_bkg) {
  if (g_sig <= 0.0 || g_bkg <= 0.0)
    throw std::invalid_argument("expected_counts: empty simulated sets");
  std::vector<Jet2<T>> out;
  out.reserve(sig_counts.size());
  for (std::size_t i = 0; i < sig_counts.size(); ++i) {
    Jet2<T> e = theta.s * Jet2<T>::constant(0, sig_counts[i]) * (1.0 / g_sig) +
                theta.b_rate * bkg_counts[i] * (1.0 / g_bkg);
    if (autodiff::value_of(e.v) < kExpectationFloor)
      e = Jet2<T>::constant(e.k, T(kExpectationFloor));
    out.push_back(std::move(e));
  }
  return out;
}

/// sum_i [E_i - O_i log E_i]; the observed-dependent log-factorial constant is
/// dropped, so only NLL differences are meaningful
template <class T>
Jet2<T> poisson_nll_jets(std::span<const Jet2<T>> expected, std::span<const T> observed) {
  using autodiff::log;
  Jet2<T> acc;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (autodiff::value_of(expected[i].v) <= 0.0)
      throw std::domain_error("poisson_nll: non-positive expectation");
    acc = acc + expected[i] - Jet2<T>::constant(0, observed[i]) * log(expected[i]);
  }
  return acc;
}

/// Asimov form: observed slots fixed to the expectation values (theta-constant
/// but still parameter-differentiable scalars)
template <class T>
Jet2<T> asimov_nll(std::span<const Jet2<T>> expected) {
  std::vector<T> observed;
  observed.reserve(expected.size());
  for (const auto& e : expected) observed.push_back(e.v);
  return poisson_nll_jets<T>(expected, observed);
}

/// + 0.5 ((theta_j - mean) / width)^2 per Gaussian constraint
template <class T>
Jet2<T> add_constraints(Jet2<T> nll, const ThetaJets<T>& theta, const BenchmarkSpec& bench) {
  for (const Constraint& c : bench.constraints) {
    Jet2<T> pull = (theta.param(c.param) - c.mean) * (1.0 / c.width);
    nll = nll + 0.5 * (pull * pull);
  }
  return nll;
}

template <class T>
struct FisherResult {
  int k = 0;
  std::vector<int> params;       // free-parameter ids in matrix order
  std::array<T, 16> info{};      // row-major k x k
  autodiff::SmallInverse<T> inverse;
  bool warn = false;

  const T& operator()(int i, int j) const { return info[static_cast<std::size_t>(i * k + j)]; }
  const T& covariance(int i, int j) const { return inverse(i, j); }
};

/// Hessian block of the nll jet over the free directions, with its inverse
template <class T>
FisherResult<T> fisher_information(const Jet2<T>& nll, const BenchmarkSpec& bench) {
  FisherResult<T> out;
  out.k = bench.n_free();
  out.params = bench.free_params();
  for (int i = 0; i < out.k; ++i)
    for (int j = 0; j < out.k; ++j) out.info[static_cast<std::size_t>(i * out.k + j)] = nll.hess(i, j);
  out.inverse = autodiff::invert_small_matrix(out.k, out.info.data());
  out.warn = out.inverse.ridged;
  return out;
}

/// U = [I^-1]_kk for the parameter of interest (first in the ordering)
template <class T>
T inferno_loss(const FisherResult<T>& fisher, int poi_index = 0) {
  return fisher.inverse(poi_index, poi_index);
}

}  // namespace inferno::statmodel
