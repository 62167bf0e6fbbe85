#pragma once

#include <cstdint>
#include <vector>

#include "xdeval/linear.hpp"

namespace xdeval {

// Task-A optimum plus diagonal Fisher information; the state of the
// quadratic consolidation penalty (lambda/2) * sum_i F_i (theta_i - theta*_i)^2.
struct EwcAnchor {
  std::vector<double> theta_star;  // (weights..., bias) at the task-A optimum
  std::vector<double> fisher;      // componentwise >= 0, same length
  double lambda = 0.0;
};

struct SequentialRunResult {
  double acc_task_a_before = 0.0;
  double acc_task_a_after = 0.0;
  double acc_task_b_after = 0.0;
  double forgetting = 0.0;  // acc_task_a_before - acc_task_a_after
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

// Empirical diagonal Fisher at `model`: mean squared log-likelihood gradient
// per parameter, ((sigma(w.x+b) - y) * x_i)^2, bias slot uses x_i = 1.
std::vector<double> fisher_diagonal(const LinearModel& model, const FeatureMatrix& x,
                                    const std::vector<int>& y);

EwcAnchor build_anchor(const LinearModel& model, const FeatureMatrix& x,
                       const std::vector<int>& y, double lambda);

double ewc_penalty(const std::vector<double>& theta, const EwcAnchor& anchor);

// Gradient descent on task-B logistic loss plus the anchor penalty,
// warm-started at `init`. lambda == 0 reduces exactly to plain fine-tuning.
LinearModel train_with_ewc(const FeatureMatrix& x_b, const std::vector<int>& y_b,
                           const LinearModel& init, const EwcAnchor& anchor,
                           const LogisticHyper& hyper);

// Train on A, anchor, train on B (with EWC when lambda > 0), measure forgetting.
SequentialRunResult run_sequential_experiment(const LabeledData& task_a, const LabeledData& task_b,
                                              double lambda, const LogisticHyper& hyper,
                                              std::uint64_t seed);

}  // namespace xdeval
