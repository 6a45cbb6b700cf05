#include "fedsim/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedsim/data.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr double kProbFloor = 1e-12;

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

// out[b x o] = in[b x i] * W^T + bias
Matrix affine(const Matrix& in, const LayerParams& layer) {
  const std::size_t batch = in.rows;
  const std::size_t out_dim = layer.out_dim();
  const std::size_t in_dim = layer.in_dim();
  Matrix out(batch, out_dim);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row_ptr(b);
    double* o = out.row_ptr(b);
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double* w = layer.weights.row_ptr(j);
      double acc = layer.biases[j];
      for (std::size_t k = 0; k < in_dim; ++k) acc += w[k] * x[k];
      o[j] = acc;
    }
  }
  return out;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data)
    if (v < 0.0) v = 0.0;
}

void softmax_rows_inplace(Matrix& m) {
  for (std::size_t b = 0; b < m.rows; ++b) {
    double* row = m.row_ptr(b);
    double mx = row[0];
    for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) row[j] /= sum;
  }
}

// Activations per position and the pre-activations of every layer; shared by
// forward() and the backward pass.
struct ForwardTrace {
  std::vector<Matrix> activations;  // activations[0] = input, back() = probabilities
  std::vector<Matrix> pre_relu;     // pre-activation of hidden layers (empty slot for output)
};

ForwardTrace run_forward(const ParamSet& params, const Matrix& inputs) {
  if (params.layers.empty()) throw std::invalid_argument("forward: empty ParamSet");
  if (inputs.cols != params.layers.front().in_dim())
    throw std::invalid_argument("forward: input width " + std::to_string(inputs.cols) +
                                " does not match first-layer in_dim " +
                                std::to_string(params.layers.front().in_dim()));
  if (inputs.rows == 0) throw std::invalid_argument("forward: empty batch");
  check_finite(inputs, "forward: inputs");

  ForwardTrace trace;
  trace.activations.reserve(params.layers.size() + 1);
  trace.pre_relu.resize(params.layers.size());
  trace.activations.push_back(inputs);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = affine(trace.activations.back(), params.layers[l]);
    if (l + 1 < params.layers.size()) {
      trace.pre_relu[l] = z;
      relu_inplace(z);
    } else {
      softmax_rows_inplace(z);
    }
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

void check_compatible_chain(const ParamSet& params) {
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l)
    if (params.layers[l].out_dim() != params.layers[l + 1].in_dim())
      throw std::invalid_argument("ParamSet: layer " + std::to_string(l) + " out_dim " +
                                  std::to_string(params.layers[l].out_dim()) +
                                  " != layer " + std::to_string(l + 1) + " in_dim " +
                                  std::to_string(params.layers[l + 1].in_dim()));
}

}  // namespace

std::size_t ParamSet::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.param_count();
  return n;
}

ParamSet init_params(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2)
    throw std::invalid_argument("init_params: need at least [input_dim, output_dim]");
  for (int d : layer_dims)
    if (d < 1) throw std::invalid_argument("init_params: dims must be positive");

  ParamSet params;
  params.layers.reserve(layer_dims.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto in_dim = static_cast<std::size_t>(layer_dims[l]);
    const auto out_dim = static_cast<std::size_t>(layer_dims[l + 1]);
    LayerParams layer;
    layer.weights = Matrix(out_dim, in_dim);
    layer.biases.assign(out_dim, 0.0);
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    Rng rng(mix_seed({seed, 0x1a7eull, static_cast<std::uint64_t>(l)}));
    for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Matrix forward(const ParamSet& params, const Matrix& inputs) {
  check_compatible_chain(params);
  return run_forward(params, inputs).activations.back();
}

std::pair<double, ParamSet> loss_and_grad(const ParamSet& params, const Matrix& x,
                                          const std::vector<int>& y) {
  check_compatible_chain(params);
  if (y.size() != x.rows) throw std::invalid_argument("loss_and_grad: labels/batch size mismatch");
  const int num_classes = static_cast<int>(params.layers.back().out_dim());
  for (int label : y)
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("loss_and_grad: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(num_classes) + ")");

  ForwardTrace trace = run_forward(params, x);
  const Matrix& probs = trace.activations.back();
  const std::size_t batch = x.rows;

  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b)
    loss -= std::log(std::max(probs(b, static_cast<std::size_t>(y[b])), kProbFloor));
  loss /= static_cast<double>(batch);

  // softmax + cross-entropy: delta at the output is (p - onehot) / batch
  Matrix delta = probs;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = delta.row_ptr(b);
    row[y[b]] -= 1.0;
    for (std::size_t j = 0; j < delta.cols; ++j) row[j] *= inv_batch;
  }

  ParamSet grads;
  grads.layers.resize(params.layers.size());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const Matrix& input_act = trace.activations[l];
    LayerParams& g = grads.layers[l];
    g.weights = Matrix(params.layers[l].out_dim(), params.layers[l].in_dim());
    g.biases.assign(params.layers[l].out_dim(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.row_ptr(b);
      const double* a = input_act.row_ptr(b);
      for (std::size_t j = 0; j < g.weights.rows; ++j) {
        double* gw = g.weights.row_ptr(j);
        const double dj = d[j];
        if (dj == 0.0) continue;
        for (std::size_t k = 0; k < g.weights.cols; ++k) gw[k] += dj * a[k];
        g.biases[j] += dj;
      }
    }
    if (l > 0) {
      // delta_prev = (delta * W) gated by the hidden ReLU
      const Matrix& w = params.layers[l].weights;
      Matrix prev(batch, w.cols);
      for (std::size_t b = 0; b < batch; ++b) {
        const double* d = delta.row_ptr(b);
        double* p = prev.row_ptr(b);
        for (std::size_t j = 0; j < w.rows; ++j) {
          const double dj = d[j];
          if (dj == 0.0) continue;
          const double* wrow = w.row_ptr(j);
          for (std::size_t k = 0; k < w.cols; ++k) p[k] += dj * wrow[k];
        }
        const double* z = trace.pre_relu[l - 1].row_ptr(b);
        for (std::size_t k = 0; k < w.cols; ++k)
          if (z[k] <= 0.0) p[k] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  return {loss, std::move(grads)};
}

FitResult sgd_fit(const ParamSet& params, const Dataset& train, const TrainConfig& cfg) {
  if (train.size() == 0) throw std::invalid_argument("sgd_fit: empty dataset");
  if (cfg.epochs < 1) throw std::invalid_argument("sgd_fit: epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0) && cfg.learning_rate != 0.0)
    throw std::invalid_argument("sgd_fit: learning_rate must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("sgd_fit: batch_size must be >= 1");

  FitResult result{params, 0.0};
  const std::size_t n = train.size();
  const std::size_t dim = train.feature_dim();
  std::vector<std::size_t> order(n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed({cfg.seed, 0x50fful, static_cast<std::uint64_t>(epoch)}));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t start = 0;
    while (start < n) {
      const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
      Matrix xb(count, dim);
      std::vector<int> yb(count);
      for (std::size_t r = 0; r < count; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(train.features.row_ptr(src), dim, xb.row_ptr(r));
        yb[r] = train.labels[src];
      }
      auto [loss, grads] = loss_and_grad(result.params, xb, yb);
      epoch_loss += loss * static_cast<double>(count);
      for (std::size_t l = 0; l < result.params.layers.size(); ++l) {
        auto& layer = result.params.layers[l];
        const auto& g = grads.layers[l];
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
          layer.weights.data[i] -= cfg.learning_rate * g.weights.data[i];
        for (std::size_t i = 0; i < layer.biases.size(); ++i)
          layer.biases[i] -= cfg.learning_rate * g.biases[i];
      }
      start += count;
    }
    result.final_loss = epoch_loss / static_cast<double>(n);
  }
  return result;
}

EvalResult evaluate(const ParamSet& params, const Dataset& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  Matrix probs = forward(params, test.features);
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t b = 0; b < probs.rows; ++b) {
    const double* row = probs.row_ptr(b);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < probs.cols; ++j)
      if (row[j] > row[arg]) arg = j;  // ties keep the lowest index
    if (static_cast<int>(arg) == test.labels[b]) ++correct;
    loss -= std::log(std::max(row[test.labels[b]], kProbFloor));
  }
  return {static_cast<double>(correct) / static_cast<double>(probs.rows),
          loss / static_cast<double>(probs.rows)};
}

ParamSet slice_layers(const ParamSet& params, const ShareSpec& spec) {
  spec.validate();
  if (spec.total_layers != static_cast<int>(params.layer_count()))
    throw std::invalid_argument("slice_layers: spec covers " + std::to_string(spec.total_layers) +
                                " layers but the model has " + std::to_string(params.layer_count()));
  ParamSet fragment;
  fragment.layers.reserve(spec.layer_indices.size());
  for (int idx : spec.layer_indices) fragment.layers.push_back(params.layers[idx]);
  return fragment;
}

ParamSet merge_layers(const ParamSet& global_fragment, const ParamSet& local_fragment,
                      const ShareSpec& spec) {
  spec.validate();
  const std::vector<int> rest = spec.complement();
  if (global_fragment.layer_count() != spec.layer_indices.size() ||
      local_fragment.layer_count() != rest.size())
    throw std::invalid_argument("merge_layers: fragments do not cover every layer exactly once");

  ParamSet merged;
  merged.layers.resize(spec.total_layers);
  for (std::size_t i = 0; i < spec.layer_indices.size(); ++i)
    merged.layers[spec.layer_indices[i]] = global_fragment.layers[i];
  for (std::size_t i = 0; i < rest.size(); ++i)
    merged.layers[rest[i]] = local_fragment.layers[i];
  check_compatible_chain(merged);
  return merged;
}

}  // namespace fedsim
