#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <span>

#include "classr/dataset.hpp"
#include "classr/expr.hpp"

namespace classr {

struct FitConfig {
  double g_tol = 1e-9;       // gradient 2-norm termination
  int max_iters = 150;       // quasi-Newton iterations per attempt
  int n_restarts = 2;        // extra randomized attempts on flag/stall
  int history_size = 10;     // L-BFGS memory
  std::uint64_t restart_seed = 0;
};

struct FitResult {
  Eigen::VectorXd class_vals;  // n_class_consts
  Eigen::MatrixXd spe_table;   // N_r x n_spe_consts
  double mse = std::numeric_limits<double>::infinity();
  double nrmse = std::numeric_limits<double>::infinity();
  double r2 = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int n_iters = 0;
  bool flagged_invalid = false;
};

// Cost of the joint fit over all realizations:
//   MSE = (1 / (N_r * sum_i N(i))) * sum_i sum_j (y_ij - f(c, k_i, x_ij))^2.
// The N_r factor in the denominator is intentional; it is not a plain pooled
// mean. Returns +inf when protected evaluation flags the candidate.
double mse(const Expression& expr, const MultiDataset& data,
           std::span<const double> class_vals, const Eigen::MatrixXd& spe_table);

// sqrt(MSE) / sigma_y with sigma_y the population standard deviation of the
// targets pooled across all realizations. Throws on a degenerate target
// (sigma_y == 0).
double nrmse(const Expression& expr, const MultiDataset& data,
             std::span<const double> class_vals, const Eigen::MatrixXd& spe_table);

// Pooled R^2 = 1 - sum (y - f)^2 / sum (y - ybar)^2 with the global mean.
double r_squared(const Expression& expr, const MultiDataset& data,
                 std::span<const double> class_vals, const Eigen::MatrixXd& spe_table);

struct ConstGrad {
  Eigen::VectorXd class_grad;  // n_class_consts
  Eigen::MatrixXd spe_grad;    // N_r x n_spe_consts
  double mse = std::numeric_limits<double>::infinity();
  bool valid = false;
};

// Exact gradient of the MSE above w.r.t. every constant, by reverse
// accumulation through the expression tree (batched over samples).
ConstGrad grad_constants(const Expression& expr, const MultiDataset& data,
                         std::span<const double> class_vals,
                         const Eigen::MatrixXd& spe_table);

// Joint minimization of the MSE over [class_vals || vec(spe_table)] with
// L-BFGS and a strong-Wolfe line search. Constants start at 1.0; flagged or
// stalled attempts retry from log-uniform magnitudes in [1e-1, 1e1] with
// random sign. Expressions without constants report metrics directly.
FitResult fit_constants(const Expression& expr, const MultiDataset& data,
                        const FitConfig& cfg = {});

}  // namespace classr
