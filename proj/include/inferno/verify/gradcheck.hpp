#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace inferno::verify {

struct CheckResult {
  std::string name;
  int cases = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// gradient() of every node kind against central finite differences (h=1e-5)
/// on random smooth inputs; tolerance 1e-5 relative
std::vector<CheckResult> gradient_fd_checks(std::uint64_t seed, int cases_per_op);

/// theta-Hessian blocks against nested central finite differences; 1e-4 relative
CheckResult hessian_fd_check(std::uint64_t seed, int cases);

/// phi-gradient of each theta-Hessian entry against finite differences of the
/// Hessian entry over phi perturbations; 1e-4 relative
CheckResult nested_hessian_gradient_check(std::uint64_t seed, int cases);

/// M * invert_small_matrix(M) - I below 1e-10 for well-conditioned random inputs
CheckResult inverse_consistency_check(std::uint64_t seed, int cases);

}  // namespace inferno::verify
