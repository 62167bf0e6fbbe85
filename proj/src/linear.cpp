#include "xdeval/linear.hpp"

#include <cmath>
#include <limits>

#include "xdeval/continual.hpp"
#include "xdeval/errors.hpp"

namespace xdeval {

void LogisticHyper::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be >= 0");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
}

void FeatureMatrix::validate() const {
  if (tail_size > dimension) throw ValidationError("tail_size exceeds dimension");
  const std::size_t binary_limit = tail_offset();
  for (const FeatureRow& row : rows) {
    for (std::uint32_t idx : row.indices) {
      if (idx >= binary_limit) throw ValidationError("feature index out of range");
    }
    if (row.tail.size() != tail_size) throw ValidationError("tail length mismatch");
    for (double v : row.tail) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

// log(1 + e^t) without overflow.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

void check_shapes(const FeatureMatrix& x, const std::vector<int>& y, const LinearModel& model) {
  if (x.rows.size() != y.size()) throw ValidationError("label count does not match row count");
  if (model.dimension() != x.dimension) throw ValidationError("model dimension mismatch");
  for (int label : y) {
    if (label != 0 && label != 1) throw ValidationError("labels must be 0 or 1");
  }
}

void check_anchor(const EwcAnchor* anchor, std::size_t n_params) {
  if (anchor == nullptr) return;
  if (anchor->theta_star.size() != n_params || anchor->fisher.size() != n_params) {
    throw ValidationError("anchor length does not match parameter count");
  }
  if (anchor->lambda < 0.0) throw ValidationError("anchor lambda must be >= 0");
}

bool anchor_active(const EwcAnchor* anchor) { return anchor != nullptr && anchor->lambda != 0.0; }

}  // namespace

double dot_row(const FeatureMatrix& x, std::size_t row, const LinearModel& model) {
  const FeatureRow& r = x.rows[row];
  double z = model.bias;
  for (std::uint32_t idx : r.indices) z += model.weights[idx];
  const std::size_t off = x.tail_offset();
  for (std::size_t j = 0; j < r.tail.size(); ++j) z += model.weights[off + j] * r.tail[j];
  return z;
}

double logistic_objective(const FeatureMatrix& x, const std::vector<int>& y,
                          const LinearModel& model, const LogisticHyper& hyper,
                          const EwcAnchor* anchor) {
  check_shapes(x, y, model);
  const std::size_t n = x.rows.size();
  if (n == 0) throw ValidationError("empty training set");
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = dot_row(x, i, model);
    loss += y[i] == 1 ? log1p_exp(-z) : log1p_exp(z);
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  loss += 0.5 * hyper.l2 * reg;
  if (anchor_active(anchor)) {
    const std::size_t d = model.dimension();
    check_anchor(anchor, d + 1);
    double penalty = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double delta = model.weights[i] - anchor->theta_star[i];
      penalty += anchor->fisher[i] * delta * delta;
    }
    const double delta_b = model.bias - anchor->theta_star[d];
    penalty += anchor->fisher[d] * delta_b * delta_b;
    loss += 0.5 * anchor->lambda * penalty;
  }
  return loss;
}

std::vector<double> logistic_gradient(const FeatureMatrix& x, const std::vector<int>& y,
                                      const LinearModel& model, const LogisticHyper& hyper,
                                      const EwcAnchor* anchor) {
  check_shapes(x, y, model);
  const std::size_t n = x.rows.size();
  if (n == 0) throw ValidationError("empty training set");
  const std::size_t d = model.dimension();
  std::vector<double> grad(d + 1, 0.0);
  const std::size_t off = x.tail_offset();
  for (std::size_t i = 0; i < n; ++i) {
    const double residual = sigmoid(dot_row(x, i, model)) - static_cast<double>(y[i]);
    const FeatureRow& r = x.rows[i];
    for (std::uint32_t idx : r.indices) grad[idx] += residual;
    for (std::size_t j = 0; j < r.tail.size(); ++j) grad[off + j] += residual * r.tail[j];
    grad[d] += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& g : grad) g *= inv_n;
  for (std::size_t i = 0; i < d; ++i) grad[i] += hyper.l2 * model.weights[i];
  if (anchor_active(anchor)) {
    check_anchor(anchor, d + 1);
    for (std::size_t i = 0; i < d; ++i) {
      grad[i] += anchor->lambda * anchor->fisher[i] * (model.weights[i] - anchor->theta_star[i]);
    }
    grad[d] += anchor->lambda * anchor->fisher[d] * (model.bias - anchor->theta_star[d]);
  }
  return grad;
}

LinearModel minimize_logistic(const FeatureMatrix& x, const std::vector<int>& y,
                              const LogisticHyper& hyper, const LinearModel& init,
                              const EwcAnchor* anchor) {
  hyper.validate();
  x.validate();
  LinearModel model = init;
  check_shapes(x, y, model);
  if (anchor != nullptr) check_anchor(anchor, model.dimension() + 1);

  const std::size_t d = model.dimension();
  double loss = logistic_objective(x, y, model, hyper, anchor);
  LinearModel trial;
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    const std::vector<double> grad = logistic_gradient(x, y, model, hyper, anchor);
    double grad_inf = 0.0;
    double grad_sq = 0.0;
    for (double g : grad) {
      grad_inf = std::max(grad_inf, std::abs(g));
      grad_sq += g * g;
    }
    if (grad_inf <= hyper.grad_tol) break;

    // Armijo backtracking keeps the fixed-rate descent stable whatever the
    // curvature (large l2, wide documents).
    double step = hyper.learning_rate;
    bool accepted = false;
    while (step >= 1e-20) {
      trial.weights.assign(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) trial.weights[i] = model.weights[i] - step * grad[i];
      trial.bias = model.bias - step * grad[d];
      const double trial_loss = logistic_objective(x, y, trial, hyper, anchor);
      if (trial_loss <= loss - 1e-4 * step * grad_sq) {
        model = trial;
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent step representable
  }
  return model;
}

LinearModel train_logistic(const FeatureMatrix& x, const std::vector<int>& y,
                           const LogisticHyper& hyper) {
  LinearModel zero;
  zero.weights.assign(x.dimension, 0.0);
  return minimize_logistic(x, y, hyper, zero, nullptr);
}

double model_accuracy(const FeatureMatrix& x, const std::vector<int>& y,
                      const LinearModel& model) {
  check_shapes(x, y, model);
  if (x.rows.empty()) throw ValidationError("empty evaluation set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows.size(); ++i) {
    const int predicted = dot_row(x, i, model) >= 0.0 ? 1 : 0;
    if (predicted == y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows.size());
}

std::vector<double> flatten(const LinearModel& model) {
  std::vector<double> theta = model.weights;
  theta.push_back(model.bias);
  return theta;
}

LinearModel unflatten(const std::vector<double>& theta) {
  if (theta.empty()) throw ValidationError("parameter vector must include a bias");
  LinearModel model;
  model.weights.assign(theta.begin(), theta.end() - 1);
  model.bias = theta.back();
  return model;
}

}  // namespace xdeval
