#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "beamproj/problem.hpp"

namespace beamproj {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out
};

// Fully-connected network with a rectifier after every layer but the last.
// The 2N outputs are read as [re(w); im(w)].
class MlpModel {
 public:
  // Weights uniform in +-sqrt(6 / fan_in) (variance 2 / fan_in), zero biases.
  static MlpModel init(std::vector<std::size_t> layer_dims, std::uint64_t seed);

  MlpModel(std::vector<std::size_t> layer_dims, std::vector<DenseLayer> layers,
           std::uint64_t seed);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t n_layers() const noexcept { return layers_.size(); }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }
  // Bumps version().
  DenseLayer& mutable_layer(std::size_t l);
  std::uint64_t seed() const noexcept { return seed_; }

  std::size_t parameter_count() const;
  // Flat view: layer by layer, weights (row-major) then biases.
  double parameter(std::size_t flat) const;
  void set_parameter(std::size_t flat, double value);

  // Incremented on every parameter change; forward caches record it.
  std::uint64_t version() const noexcept { return version_; }

  bool all_finite() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
  std::uint64_t version_ = 0;
};

// [2NM, K, ..., K, 2N] with hidden_layers copies of K. The default (two
// hidden layers) gives three fully-connected layers.
std::vector<std::size_t> default_layer_dims(std::size_t n_antennas, std::size_t n_users,
                                            std::size_t hidden = 512,
                                            std::size_t hidden_layers = 2);

struct ForwardCache {
  const MlpModel* model = nullptr;
  std::uint64_t version = 0;
  std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
  std::vector<std::vector<double>> pre;     // pre-activation of layer l
};

struct ForwardResult {
  BeamVector w;
  ForwardCache cache;
};

// Both throw TrainingDiverged if the output is not finite.
ForwardResult forward(const MlpModel& model, std::span<const double> features);
// Forward pass without a cache.
BeamVector infer(const MlpModel& model, std::span<const double> features);

struct ModelGradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  static ModelGradients zeros_like(const MlpModel& model);
  void set_zero();
  ModelGradients& operator+=(const ModelGradients& other);
  ModelGradients& operator*=(double s);
  std::size_t size() const;
  double at(std::size_t flat) const;  // same flat layout as MlpModel::parameter
  bool all_finite() const;
};

// Reverse-mode gradients given dL/dw in the real parametrization. The
// rectifier derivative at exactly 0 is taken as 0.
ModelGradients backward(const MlpModel& model, const ForwardCache& cache,
                        std::span<const double> grad_w);
// Accumulates scale * gradients into acc.
void backward_accumulate(const MlpModel& model, const ForwardCache& cache,
                         std::span<const double> grad_w, double scale, ModelGradients& acc);

struct AdamState {
  AdamState(const MlpModel& model, double learning_rate);

  double learning_rate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  ModelGradients first_moment;
  ModelGradients second_moment;
};

// Bias-corrected Adam update. Throws TrainingDiverged on non-finite gradients.
void adam_step(MlpModel& model, const ModelGradients& grads, AdamState& state);

}  // namespace beamproj
