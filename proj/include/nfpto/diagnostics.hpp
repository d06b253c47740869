#pragma once

#include <cstdint>
#include <vector>

#include "nfpto/problems.hpp"

namespace nfpto {

struct GradCheckRow {
  int design = 0;       // sampled design index
  double analytic = 0.0;
  double fd = 0.0;      // central difference
  double rel_err = 0.0;
};

struct GradCheckResult {
  std::vector<GradCheckRow> rows;
  double max_rel_err = 0.0;  // over components with |g| > floor
};

// Fourth-order central differences of the problem objective against grad_beta
// at a seeded random interior design (beta ~ U[-2, -0.1]). The wide stencil
// and step keep the difference above the rounding floor of the objective,
// which matters for components orders of magnitude below the objective value.
// Components with both analytic and FD magnitude below `floor` are reported
// with rel_err = 0.
GradCheckResult gradcheck(const Problem& problem, int n_samples,
                          std::uint64_t seed, double step = 4e-3,
                          double floor = 1e-10);

}  // namespace nfpto
