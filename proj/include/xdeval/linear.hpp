#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace xdeval {

struct EwcAnchor;  // continual.hpp

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dimension() const { return weights.size(); }
};

struct LogisticHyper {
  double learning_rate = 0.1;  // initial step size per epoch
  double l2 = 1e-3;            // ridge penalty on weights (bias excluded)
  int max_epochs = 500;
  double grad_tol = 1e-6;  // stop when the gradient infinity norm drops below

  void validate() const;
};

// One example: binary features at `indices` plus an optional dense tail that
// occupies the last tail_size feature slots.
struct FeatureRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> tail;
};

struct FeatureMatrix {
  std::size_t dimension = 0;  // total feature count, tail included
  std::size_t tail_size = 0;
  std::vector<FeatureRow> rows;

  std::size_t tail_offset() const { return dimension - tail_size; }
  void validate() const;  // index bounds, tail lengths, finite values
};

struct LabeledData {
  FeatureMatrix x;
  std::vector<int> y;  // binary labels, 0 or 1
};

double sigmoid(double z);

double dot_row(const FeatureMatrix& x, std::size_t row, const LinearModel& model);

// Mean negative log-likelihood plus (l2/2)*||w||^2; the anchor's quadratic
// penalty is added when one is supplied with nonzero lambda.
double logistic_objective(const FeatureMatrix& x, const std::vector<int>& y,
                          const LinearModel& model, const LogisticHyper& hyper,
                          const EwcAnchor* anchor = nullptr);

// Gradient of the same objective; layout is (weights..., bias).
std::vector<double> logistic_gradient(const FeatureMatrix& x, const std::vector<int>& y,
                                      const LinearModel& model, const LogisticHyper& hyper,
                                      const EwcAnchor* anchor = nullptr);

// Full-batch gradient descent with deterministic Armijo backtracking from
// hyper.learning_rate. Stops at hyper.grad_tol on the gradient infinity norm
// or after max_epochs.
LinearModel minimize_logistic(const FeatureMatrix& x, const std::vector<int>& y,
                              const LogisticHyper& hyper, const LinearModel& init,
                              const EwcAnchor* anchor = nullptr);

// Zero-initialized training, no anchor.
LinearModel train_logistic(const FeatureMatrix& x, const std::vector<int>& y,
                           const LogisticHyper& hyper);

// Fraction of examples where (score >= 0.5) matches the label.
double model_accuracy(const FeatureMatrix& x, const std::vector<int>& y,
                      const LinearModel& model);

// (weights..., bias) <-> LinearModel
std::vector<double> flatten(const LinearModel& model);
LinearModel unflatten(const std::vector<double>& theta);

}  // namespace xdeval
