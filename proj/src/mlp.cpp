#include "beamproj/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beamproj/errors.hpp"
#include "beamproj/rng.hpp"

namespace beamproj {

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw UsageError("MlpModel: need at least input and output dims");
  for (std::size_t d : dims) {
    if (d == 0) throw UsageError("MlpModel: layer dims must be positive");
  }
  if (dims.back() % 2 != 0) throw UsageError("MlpModel: output dim must be even (2N)");
}

bool finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Locates a flat parameter index: returns pointer into weight or bias.
template <typename Layers>
auto locate(Layers& layers, std::size_t flat) -> decltype(&layers[0].weight[0]) {
  for (auto& layer : layers) {
    if (flat < layer.weight.size()) return &layer.weight[flat];
    flat -= layer.weight.size();
    if (flat < layer.bias.size()) return &layer.bias[flat];
    flat -= layer.bias.size();
  }
  throw UsageError("parameter index out of range");
}

}  // namespace

MlpModel MlpModel::init(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
  check_dims(layer_dims);
  std::vector<DenseLayer> layers(layer_dims.size() - 1);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer& layer = layers[l];
    layer.in = layer_dims[l];
    layer.out = layer_dims[l + 1];
    layer.weight.resize(layer.in * layer.out);
    layer.bias.assign(layer.out, 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    RandomStream rng(seed, StreamDomain::Init, l);
    for (double& w : layer.weight) w = bound * (2.0 * rng.uniform() - 1.0);
  }
  return MlpModel(std::move(layer_dims), std::move(layers), seed);
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims, std::vector<DenseLayer> layers,
                   std::uint64_t seed)
    : dims_(std::move(layer_dims)), layers_(std::move(layers)), seed_(seed) {
  check_dims(dims_);
  if (layers_.size() + 1 != dims_.size()) throw UsageError("MlpModel: layer count mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.in != dims_[l] || layer.out != dims_[l + 1] ||
        layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw UsageError("MlpModel: layer " + std::to_string(l) + " shape inconsistent with dims");
    }
  }
  if (!all_finite()) throw UsageError("MlpModel: non-finite parameter");
}

DenseLayer& MlpModel::mutable_layer(std::size_t l) {
  ++version_;
  return layers_.at(l);
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

double MlpModel::parameter(std::size_t flat) const { return *locate(layers_, flat); }

void MlpModel::set_parameter(std::size_t flat, double value) {
  *locate(layers_, flat) = value;
  ++version_;
}

bool MlpModel::all_finite() const {
  for (const DenseLayer& layer : layers_) {
    if (!finite(layer.weight) || !finite(layer.bias)) return false;
  }
  return true;
}

std::vector<std::size_t> default_layer_dims(std::size_t n_antennas, std::size_t n_users,
                                            std::size_t hidden, std::size_t hidden_layers) {
  std::vector<std::size_t> dims{2 * n_antennas * n_users};
  for (std::size_t l = 0; l < hidden_layers; ++l) dims.push_back(hidden);
  dims.push_back(2 * n_antennas);
  return dims;
}

namespace {

void dense(const DenseLayer& layer, std::span<const double> x, std::vector<double>& z) {
  z.resize(layer.out);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = layer.weight.data() + o * layer.in;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    z[o] = acc;
  }
}

void check_input(const MlpModel& model, std::span<const double> features) {
  if (features.size() != model.input_dim()) {
    throw UsageError("forward: feature length " + std::to_string(features.size()) +
                     " != input dim " + std::to_string(model.input_dim()));
  }
}

}  // namespace

namespace {

void require_finite_output(const std::vector<double>& out) {
  for (double v : out) {
    if (!std::isfinite(v)) throw TrainingDiverged("non-finite network output");
  }
}

}  // namespace

ForwardResult forward(const MlpModel& model, std::span<const double> features) {
  check_input(model, features);
  const std::size_t depth = model.n_layers();
  ForwardResult r;
  r.cache.model = &model;
  r.cache.version = model.version();
  r.cache.inputs.resize(depth);
  r.cache.pre.resize(depth);
  r.cache.inputs[0].assign(features.begin(), features.end());
  for (std::size_t l = 0; l < depth; ++l) {
    dense(model.layer(l), r.cache.inputs[l], r.cache.pre[l]);
    if (l + 1 < depth) {
      std::vector<double>& next = r.cache.inputs[l + 1];
      next.resize(r.cache.pre[l].size());
      for (std::size_t j = 0; j < next.size(); ++j) next[j] = std::max(r.cache.pre[l][j], 0.0);
    }
  }
  require_finite_output(r.cache.pre.back());
  r.w = BeamVector::from_real_params(r.cache.pre.back());
  return r;
}

BeamVector infer(const MlpModel& model, std::span<const double> features) {
  check_input(model, features);
  std::vector<double> a(features.begin(), features.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    dense(model.layer(l), a, z);
    if (l + 1 < model.n_layers()) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    std::swap(a, z);
  }
  require_finite_output(a);
  return BeamVector::from_real_params(a);
}

ModelGradients ModelGradients::zeros_like(const MlpModel& model) {
  ModelGradients g;
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    g.weight.emplace_back(model.layer(l).weight.size(), 0.0);
    g.bias.emplace_back(model.layer(l).bias.size(), 0.0);
  }
  return g;
}

void ModelGradients::set_zero() {
  for (auto& w : weight) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

ModelGradients& ModelGradients::operator+=(const ModelGradients& other) {
  if (other.weight.size() != weight.size()) throw UsageError("ModelGradients: shape mismatch");
  for (std::size_t l = 0; l < weight.size(); ++l) {
    if (other.weight[l].size() != weight[l].size() || other.bias[l].size() != bias[l].size()) {
      throw UsageError("ModelGradients: shape mismatch");
    }
    for (std::size_t k = 0; k < weight[l].size(); ++k) weight[l][k] += other.weight[l][k];
    for (std::size_t k = 0; k < bias[l].size(); ++k) bias[l][k] += other.bias[l][k];
  }
  return *this;
}

ModelGradients& ModelGradients::operator*=(double s) {
  for (auto& w : weight) {
    for (double& v : w) v *= s;
  }
  for (auto& b : bias) {
    for (double& v : b) v *= s;
  }
  return *this;
}

std::size_t ModelGradients::size() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) n += weight[l].size() + bias[l].size();
  return n;
}

double ModelGradients::at(std::size_t flat) const {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    if (flat < weight[l].size()) return weight[l][flat];
    flat -= weight[l].size();
    if (flat < bias[l].size()) return bias[l][flat];
    flat -= bias[l].size();
  }
  throw UsageError("gradient index out of range");
}

bool ModelGradients::all_finite() const {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    if (!finite(weight[l]) || !finite(bias[l])) return false;
  }
  return true;
}

void backward_accumulate(const MlpModel& model, const ForwardCache& cache,
                         std::span<const double> grad_w, double scale, ModelGradients& acc) {
  if (cache.model != &model || cache.version != model.version()) {
    throw UsageError("backward: cache is stale (model changed since forward)");
  }
  if (grad_w.size() != model.output_dim()) throw UsageError("backward: grad_w length != 2N");
  if (acc.weight.size() != model.n_layers()) throw UsageError("backward: gradient shape mismatch");

  std::vector<double> delta(grad_w.begin(), grad_w.end());
  std::vector<double> prev;
  for (std::size_t l = model.n_layers(); l-- > 0;) {
    const DenseLayer& layer = model.layer(l);
    const std::vector<double>& x = cache.inputs[l];
    std::vector<double>& gw = acc.weight[l];
    std::vector<double>& gb = acc.bias[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = scale * delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* row = gw.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) row[i] += d * x[i];
    }
    if (l == 0) break;
    prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * d;
    }
    const std::vector<double>& z = cache.pre[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (!(z[i] > 0.0)) prev[i] = 0.0;
    }
    std::swap(delta, prev);
  }
}

ModelGradients backward(const MlpModel& model, const ForwardCache& cache,
                        std::span<const double> grad_w) {
  ModelGradients g = ModelGradients::zeros_like(model);
  backward_accumulate(model, cache, grad_w, 1.0, g);
  return g;
}

AdamState::AdamState(const MlpModel& model, double lr)
    : learning_rate(lr),
      first_moment(ModelGradients::zeros_like(model)),
      second_moment(ModelGradients::zeros_like(model)) {
  if (!(lr > 0.0)) throw UsageError("AdamState: learning rate must be positive");
}

void adam_step(MlpModel& model, const ModelGradients& grads, AdamState& state) {
  if (grads.weight.size() != model.n_layers() ||
      state.first_moment.weight.size() != model.n_layers()) {
    throw UsageError("adam_step: shape mismatch");
  }
  if (!grads.all_finite()) throw TrainingDiverged("adam_step: non-finite gradient");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1, b2 = state.beta2;

  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (p.size() != g.size() || m.size() != g.size()) throw UsageError("adam_step: shape mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  };
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    DenseLayer& layer = model.mutable_layer(l);
    update(layer.weight, grads.weight[l], state.first_moment.weight[l],
           state.second_moment.weight[l]);
    update(layer.bias, grads.bias[l], state.first_moment.bias[l], state.second_moment.bias[l]);
  }
  if (!model.all_finite()) throw TrainingDiverged("adam_step: parameters became non-finite");
}

}  // namespace beamproj
