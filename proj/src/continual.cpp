#include "xdeval/continual.hpp"

#include <cmath>

#include "xdeval/errors.hpp"

namespace xdeval {

std::vector<double> fisher_diagonal(const LinearModel& model, const FeatureMatrix& x,
                                    const std::vector<int>& y) {
  if (x.rows.empty()) throw ValidationError("fisher_diagonal: empty data");
  if (x.rows.size() != y.size()) throw ValidationError("label count does not match row count");
  if (model.dimension() != x.dimension) throw ValidationError("model dimension mismatch");

  const std::size_t d = model.dimension();
  std::vector<double> fisher(d + 1, 0.0);
  const std::size_t off = x.tail_offset();
  for (std::size_t i = 0; i < x.rows.size(); ++i) {
    const double residual = sigmoid(dot_row(x, i, model)) - static_cast<double>(y[i]);
    const double r2 = residual * residual;
    const FeatureRow& row = x.rows[i];
    for (std::uint32_t idx : row.indices) fisher[idx] += r2;  // binary feature: (r*1)^2
    for (std::size_t j = 0; j < row.tail.size(); ++j) {
      fisher[off + j] += r2 * row.tail[j] * row.tail[j];
    }
    fisher[d] += r2;
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows.size());
  for (double& f : fisher) f *= inv_n;
  return fisher;
}

EwcAnchor build_anchor(const LinearModel& model, const FeatureMatrix& x,
                       const std::vector<int>& y, double lambda) {
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  EwcAnchor anchor;
  anchor.theta_star = flatten(model);
  anchor.fisher = fisher_diagonal(model, x, y);
  anchor.lambda = lambda;
  return anchor;
}

double ewc_penalty(const std::vector<double>& theta, const EwcAnchor& anchor) {
  if (theta.size() != anchor.theta_star.size() || theta.size() != anchor.fisher.size()) {
    throw ValidationError("ewc_penalty: parameter length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double delta = theta[i] - anchor.theta_star[i];
    sum += anchor.fisher[i] * delta * delta;
  }
  return 0.5 * anchor.lambda * sum;
}

LinearModel train_with_ewc(const FeatureMatrix& x_b, const std::vector<int>& y_b,
                           const LinearModel& init, const EwcAnchor& anchor,
                           const LogisticHyper& hyper) {
  return minimize_logistic(x_b, y_b, hyper, init, &anchor);
}

SequentialRunResult run_sequential_experiment(const LabeledData& task_a, const LabeledData& task_b,
                                              double lambda, const LogisticHyper& hyper,
                                              std::uint64_t seed) {
  if (task_a.x.dimension != task_b.x.dimension) {
    throw ValidationError("task feature dimensions differ: " +
                          std::to_string(task_a.x.dimension) + " vs " +
                          std::to_string(task_b.x.dimension));
  }

  LinearModel model_a = train_logistic(task_a.x, task_a.y, hyper);
  SequentialRunResult result;
  result.lambda = lambda;
  result.seed = seed;
  result.acc_task_a_before = model_accuracy(task_a.x, task_a.y, model_a);

  const EwcAnchor anchor = build_anchor(model_a, task_a.x, task_a.y, lambda);
  const LinearModel model_b = train_with_ewc(task_b.x, task_b.y, model_a, anchor, hyper);

  result.acc_task_a_after = model_accuracy(task_a.x, task_a.y, model_b);
  result.acc_task_b_after = model_accuracy(task_b.x, task_b.y, model_b);
  result.forgetting = result.acc_task_a_before - result.acc_task_a_after;
  return result;
}

}  // namespace xdeval
