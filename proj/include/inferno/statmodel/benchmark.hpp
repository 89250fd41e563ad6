#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace inferno::statmodel {

/// fixed parameter ordering (s, r, lambda, b_rate); matrices index free
/// parameters in this order
enum ParamId : int { kS = 0, kR = 1, kLambda = 2, kBRate = 3 };

struct ThetaPoint {
  double s = 50.0;
  double r = 0.0;
  double lambda = 3.0;
  double b_rate = 1000.0;

  double operator[](int p) const {
    switch (p) {
      case kS: return s;
      case kR: return r;
      case kLambda: return lambda;
      default: return b_rate;
    }
  }

  void validate() const {
    if (s < 0.0) throw std::domain_error("ThetaPoint: s must be >= 0");
    if (b_rate <= 0.0) throw std::domain_error("ThetaPoint: b_rate must be > 0");
    if (lambda <= 0.0) throw std::domain_error("ThetaPoint: lambda must be > 0");
  }
};

struct Constraint {
  int param = kR;
  double mean = 0.0;
  double width = 1.0;
};

/// which parameters are free and how they are constrained; ids 0-4 follow the
/// study's benchmark list
struct BenchmarkSpec {
  int id = 0;
  std::array<bool, 4> free{true, false, false, false};
  std::vector<Constraint> constraints;

  static BenchmarkSpec standard(int id) {
    BenchmarkSpec b;
    b.id = id;
    switch (id) {
      case 0: break;
      case 1: b.free = {true, true, false, false}; break;
      case 2: b.free = {true, true, true, false}; break;
      case 3:
        b.free = {true, true, true, false};
        b.constraints = {{kR, 0.0, 0.4}, {kLambda, 3.0, 1.0}};
        break;
      case 4:
        b.free = {true, true, true, true};
        b.constraints = {{kR, 0.0, 0.4}, {kLambda, 3.0, 1.0}, {kBRate, 1000.0, 100.0}};
        break;
      default: throw std::invalid_argument("BenchmarkSpec: id must be 0..4");
    }
    b.validate();
    return b;
  }

  void validate() const {
    if (!free[kS]) throw std::logic_error("BenchmarkSpec: parameter of interest must be free");
    for (const auto& c : constraints) {
      if (!free[static_cast<std::size_t>(c.param)])
        throw std::logic_error("BenchmarkSpec: constraint on a fixed parameter");
      if (c.width <= 0.0) throw std::logic_error("BenchmarkSpec: constraint width must be > 0");
    }
  }

  int n_free() const {
    int n = 0;
    for (bool f : free) n += f;
    return n;
  }

  std::vector<int> free_params() const {
    std::vector<int> out;
    for (int p = 0; p < 4; ++p)
      if (free[static_cast<std::size_t>(p)]) out.push_back(p);
    return out;
  }

  /// direction index of a parameter among the free set, -1 when fixed
  int dir_of(int param) const {
    int d = 0;
    for (int p = 0; p < 4; ++p) {
      if (p == param) return free[static_cast<std::size_t>(p)] ? d : -1;
      d += free[static_cast<std::size_t>(p)];
    }
    return -1;
  }

  /// s comes first in the ordering, so the parameter of interest is index 0
  int poi_index() const { return 0; }
};

}  // namespace inferno::statmodel
