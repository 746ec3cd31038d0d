#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dream/errors.hpp"
#include "dream/features.hpp"

namespace dream {

struct LogRegModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::vector<double> bias;                  // [class]
};

struct LogRegConfig {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t epochs = 300;
};

namespace detail {

inline std::vector<double> softmax_scores(const LogRegModel& m, const TermVector& x) {
  std::vector<double> z(m.num_classes, 0.0);
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    double s = m.bias[c];
    for (const auto& [idx, value] : x.entries) s += m.weights[c][idx] * value;
    z[c] = s;
  }
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

}  // namespace detail

inline std::vector<double> predict_proba(const LogRegModel& model, const TermVector& x) {
  return detail::softmax_scores(model, x);
}

// Mean cross-entropy plus (l2/2)*||W||^2 (bias unregularized); gradients are
// written into grad_w/grad_b when non-null. Shared by training and the
// finite-difference check.
inline double logreg_loss_grad(const LogRegModel& m, const std::vector<TermVector>& X,
                               const std::vector<std::size_t>& y, double l2,
                               std::vector<std::vector<double>>* grad_w = nullptr,
                               std::vector<double>* grad_b = nullptr) {
  const double n = static_cast<double>(X.size());
  if (grad_w) grad_w->assign(m.num_classes, std::vector<double>(m.num_features, 0.0));
  if (grad_b) grad_b->assign(m.num_classes, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const std::vector<double> p = detail::softmax_scores(m, X[i]);
    loss -= std::log(std::max(p[y[i]], 1e-300));
    if (!grad_w && !grad_b) continue;
    for (std::size_t c = 0; c < m.num_classes; ++c) {
      const double delta = (p[c] - (y[i] == c ? 1.0 : 0.0)) / n;
      if (grad_b) (*grad_b)[c] += delta;
      if (grad_w)
        for (const auto& [idx, value] : X[i].entries) (*grad_w)[c][idx] += delta * value;
    }
  }
  loss /= n;
  for (std::size_t c = 0; c < m.num_classes; ++c)
    for (std::size_t d = 0; d < m.num_features; ++d) {
      loss += 0.5 * l2 * m.weights[c][d] * m.weights[c][d];
      if (grad_w) (*grad_w)[c][d] += l2 * m.weights[c][d];
    }
  return loss;
}

// Full-batch gradient descent from zero-initialized parameters.
inline LogRegModel train_logreg(const std::vector<TermVector>& X, const std::vector<std::size_t>& y,
                                std::size_t num_classes, std::size_t num_features, const LogRegConfig& config) {
  if (X.size() != y.size() || X.size() < num_classes) throw Error("train_logreg: too few examples");
  LogRegModel m;
  m.num_classes = num_classes;
  m.num_features = num_features;
  m.weights.assign(num_classes, std::vector<double>(num_features, 0.0));
  m.bias.assign(num_classes, 0.0);
  std::vector<std::vector<double>> grad_w;
  std::vector<double> grad_b;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = logreg_loss_grad(m, X, y, config.l2, &grad_w, &grad_b);
    if (!std::isfinite(loss)) throw Error("train_logreg: non-finite loss at epoch " + std::to_string(epoch));
    for (std::size_t c = 0; c < num_classes; ++c) {
      m.bias[c] -= config.learning_rate * grad_b[c];
      for (std::size_t d = 0; d < num_features; ++d) m.weights[c][d] -= config.learning_rate * grad_w[c][d];
    }
  }
  return m;
}

}  // namespace dream
