#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nfpto/problems.hpp"

namespace nfpto {

enum class OptAlgo { mma, projected_gradient };

struct OptRecord {
  int iter = 0;
  double objective = 0.0;
  double volume_fraction = 0.0;
  double grayness = 0.0;
  double max_design_change = 0.0;
  double constraint_violation = 0.0;  // max(0, volume_fraction - vf)
};

struct OptSettings {
  int max_iters = 1000;
  double move_limit = 0.05;         // fraction of |beta_lb|
  double design_change_tol = -1.0;  // < 0: defaults to 1e-4 * |beta_lb|
  double kkt_tol = 1e-6;
  int history_stride = 1;
  OptAlgo algo = OptAlgo::mma;
  double initial_rho = 0.7;         // beta0 = ln(1 - initial_rho)
  std::function<void(const OptRecord&)> on_record;  // fires per history row
};

struct OptHistory {
  std::vector<OptRecord> records;  // iter 0 and the final iterate always kept
  std::string termination;         // max_iters | design_change | kkt
  int iterations = 0;
};

struct OptResult {
  DesignField design;
  DensityField rho;
  OptHistory history;
  ObjectiveReport report;  // at the final iterate
};

// Asymptote state for the sequential approximation; one constraint, dual
// solved by bisection. Deterministic for fixed inputs.
struct MmaState {
  int iter = 0;
  double x_min = -90.0;
  double x_max = 0.0;
  std::vector<double> xold1, xold2, low, upp;
  double dual = 0.0;  // multiplier estimate from the last subproblem

  void reset(int n, double lb);
};

// One update of x from scaled objective/constraint linearizations. Throws on
// non-finite gradients; never leaves [x_min, x_max].
std::vector<double> mma_step(MmaState& state, const std::vector<double>& x,
                             const std::vector<double>& df0, double f1,
                             const std::vector<double>& df1,
                             const OptSettings& settings);

// Move-limited projected gradient with the constraint handled through a
// bisected multiplier on the linearized model. Shares MmaState bookkeeping.
std::vector<double> pg_step(MmaState& state, const std::vector<double>& x,
                            const std::vector<double>& df0, double f1,
                            const std::vector<double>& df1,
                            const OptSettings& settings);

OptResult solve(const Problem& problem, const OptSettings& settings = {});

}  // namespace nfpto
