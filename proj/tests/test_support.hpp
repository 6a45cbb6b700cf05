#pragma once

// shared helpers for the doctest suites

#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nnet.hpp"
#include "fedsim/rng.hpp"

namespace testsup {

inline fedsim::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                    double lo = -1.0, double hi = 1.0) {
  fedsim::Matrix m(rows, cols);
  fedsim::Rng rng(seed);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline std::vector<int> random_labels(std::size_t n, int num_classes, std::uint64_t seed) {
  std::vector<int> y(n);
  fedsim::Rng rng(seed);
  for (int& v : y) v = static_cast<int>(rng.index(num_classes));
  return y;
}

inline fedsim::Dataset random_dataset(std::size_t n, std::size_t dim, int num_classes,
                                      std::uint64_t seed) {
  fedsim::Dataset d;
  d.features = random_matrix(n, dim, seed);
  d.labels = random_labels(n, num_classes, seed ^ 0xabcdull);
  d.num_classes = num_classes;
  return d;
}

// Central finite differences over every parameter; the independent oracle
// for the analytic gradients.
inline fedsim::ParamSet finite_difference_grads(const fedsim::ParamSet& params,
                                                const fedsim::Matrix& x,
                                                const std::vector<int>& y, double h = 1e-5) {
  auto loss_at = [&](const fedsim::ParamSet& p) { return fedsim::loss_and_grad(p, x, y).first; };
  fedsim::ParamSet grads = params;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t i = 0; i < params.layers[l].weights.data.size(); ++i) {
      fedsim::ParamSet plus = params, minus = params;
      plus.layers[l].weights.data[i] += h;
      minus.layers[l].weights.data[i] -= h;
      grads.layers[l].weights.data[i] = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    }
    for (std::size_t i = 0; i < params.layers[l].biases.size(); ++i) {
      fedsim::ParamSet plus = params, minus = params;
      plus.layers[l].biases[i] += h;
      minus.layers[l].biases[i] -= h;
      grads.layers[l].biases[i] = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    }
  }
  return grads;
}

inline double max_relative_error(const fedsim::ParamSet& analytic, const fedsim::ParamSet& fd) {
  double worst = 0.0;
  auto update = [&](double a, double f) {
    const double denom = std::max({std::fabs(a), std::fabs(f), 1e-3});
    worst = std::max(worst, std::fabs(a - f) / denom);
  };
  for (std::size_t l = 0; l < analytic.layers.size(); ++l) {
    for (std::size_t i = 0; i < analytic.layers[l].weights.data.size(); ++i)
      update(analytic.layers[l].weights.data[i], fd.layers[l].weights.data[i]);
    for (std::size_t i = 0; i < analytic.layers[l].biases.size(); ++i)
      update(analytic.layers[l].biases[i], fd.layers[l].biases[i]);
  }
  return worst;
}

}  // namespace testsup
