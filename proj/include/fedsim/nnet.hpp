#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedsim/matrix.hpp"
#include "fedsim/share_spec.hpp"

namespace fedsim {

struct Dataset;  // data.hpp

// One dense layer: weights[out_dim x in_dim] plus a bias per output unit.
struct LayerParams {
  Matrix weights;
  std::vector<double> biases;

  std::size_t out_dim() const { return weights.rows; }
  std::size_t in_dim() const { return weights.cols; }
  std::size_t param_count() const { return weights.rows * weights.cols + biases.size(); }

  bool operator==(const LayerParams& o) const {
    return weights == o.weights && biases == o.biases;
  }
};

// Ordered list of dense layers. A ParamSet is either a full model (adjacent
// layers dimension-compatible, ReLU on hidden positions, softmax on the
// last) or a fragment produced by slice_layers, which only carries the
// selected layers.
struct ParamSet {
  std::vector<LayerParams> layers;

  std::size_t layer_count() const { return layers.size(); }
  std::size_t param_count() const;

  bool operator==(const ParamSet& o) const { return layers == o.layers; }
};

struct TrainConfig {
  int epochs = 1;               // tau: local iterations over the data
  double learning_rate = 0.05;  // eta
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct FitResult {
  ParamSet params;
  double final_loss = 0.0;  // mean loss over the last epoch
};

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

// Deterministic initialization: weights uniform in +-sqrt(6/(in+out)),
// biases zero. layer_dims lists the input width followed by each layer's
// output width, so it needs at least two entries.
ParamSet init_params(const std::vector<int>& layer_dims, std::uint64_t seed);

// Batch forward pass. Hidden layers ReLU, output softmax (computed with
// max-subtraction). Each returned row is a probability vector.
Matrix forward(const ParamSet& params, const Matrix& inputs);

// Mean sparse categorical cross-entropy over the batch and its gradient,
// shaped exactly like params. Probabilities are clamped at 1e-12 before log.
std::pair<double, ParamSet> loss_and_grad(const ParamSet& params, const Matrix& x,
                                          const std::vector<int>& y);

// Mini-batch SGD for cfg.epochs epochs with per-epoch Fisher-Yates
// shuffling seeded from (cfg.seed, epoch). Pure: the input ParamSet is
// returned updated by value, the argument is untouched.
FitResult sgd_fit(const ParamSet& params, const Dataset& train, const TrainConfig& cfg);

// Accuracy (argmax, ties to the lowest class index) and mean loss.
EvalResult evaluate(const ParamSet& params, const Dataset& test);

// Layers indexed by spec, order preserved.
ParamSet slice_layers(const ParamSet& params, const ShareSpec& spec);

// Inverse of slicing: global_fragment carries spec's layers, local_fragment
// the complement; together they must cover every index exactly once.
ParamSet merge_layers(const ParamSet& global_fragment, const ParamSet& local_fragment,
                      const ShareSpec& spec);

}  // namespace fedsim
