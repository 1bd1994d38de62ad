#include "beamproj/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/parallel.hpp"
#include "beamproj/rng.hpp"

namespace beamproj {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ProjUnfeasible: return "proj-unfeasible";
    case Variant::ProjAll: return "proj-all";
    case Variant::ProjPretrain: return "proj-pretrain";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  if (s == "proj-unfeasible") return Variant::ProjUnfeasible;
  if (s == "proj-all") return Variant::ProjAll;
  if (s == "proj-pretrain") return Variant::ProjPretrain;
  throw UsageError("unknown variant '" + s + "' (expected proj-unfeasible, proj-all, proj-pretrain)");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxEpochs: return "max-epochs";
    case StopReason::EarlyStop: return "early-stop";
    case StopReason::Diverged: return "diverged";
  }
  return "unknown";
}

TrainConfig TrainConfig::dataset_defaults() {
  TrainConfig c;
  c.learning_rate = 1e-3;
  return c;
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw UsageError("TrainConfig: max_epochs must be >= 1");
  if (variant == Variant::ProjPretrain && (pretrain_epochs < 0 || pretrain_epochs >= max_epochs)) {
    throw UsageError("TrainConfig: need 0 <= pretrain_epochs < max_epochs");
  }
  if (!(learning_rate > 0.0)) throw UsageError("TrainConfig: learning_rate must be positive");
  if (!(penalty_coeff > 0.0)) throw UsageError("TrainConfig: penalty_coeff must be positive");
  if (batch_size == 0) throw UsageError("TrainConfig: batch_size must be positive");
  if (!(early_stop_eps > 0.0)) throw UsageError("TrainConfig: early_stop_eps must be positive");
  if (early_stop_patience < 0) throw UsageError("TrainConfig: early_stop_patience must be >= 0");
  if (hidden == 0) throw UsageError("TrainConfig: hidden width must be positive");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw UsageError("TrainConfig: split_ratio must lie in (0, 1)");
  }
}

LossAndGrad projection_loss(const ProblemInstance& inst, const BeamVector& w, ProjectionMode mode) {
  ObjectiveGradient g = mode == ProjectionMode::Always ? grad_projected_objective(inst, w)
                                                       : grad_if_infeasible_objective(inst, w);
  return {g.value, std::move(g.grad)};
}

LossAndGrad penalty_loss(const ProblemInstance& inst, const BeamVector& w, double coeff) {
  const std::size_t n = inst.n_antennas();
  LossAndGrad out;
  out.loss = objective(w);
  out.grad_w.resize(2 * n);
  const auto x = w.real_params();
  for (std::size_t j = 0; j < 2 * n; ++j) out.grad_w[j] = 2.0 * x[j];
  for (std::size_t i = 0; i < inst.n_users(); ++i) {
    const cplx s = inner(inst.channel(i), w.vec());
    const double shortfall = inst.snr_target(i) - std::norm(s) / inst.noise_var(i);
    if (shortfall <= 0.0) continue;
    out.loss += coeff * shortfall;
    // d/dx of -|h^H w|^2 / sigma^2 is -2 [re(h s); im(h s)] / sigma^2
    const double a = -2.0 * coeff / inst.noise_var(i);
    const ComplexVec& h = inst.channel(i);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx hs = h[j] * s;
      out.grad_w[j] += a * hs.real();
      out.grad_w[n + j] += a * hs.imag();
    }
  }
  return out;
}

std::size_t repair_degenerate(const ProblemInstance& inst, BeamVector& w) {
  constexpr double kDegenerate = 1e-12;
  constexpr double kNudge = 1e-6;
  std::size_t events = 0;
  for (std::size_t i = 0; i < inst.n_users(); ++i) {
    const ComplexVec& h = inst.channel(i);
    if (std::abs(inner(h, w.vec())) >= kDegenerate) continue;
    const double scale = kNudge / std::sqrt(norm_sq(h));
    auto p = w.real_params();
    const auto hp = h.params();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += scale * hp[j];
    ++events;
  }
  return events;
}

std::vector<double> model_features(const ProblemInstance& inst, const TrainConfig& config) {
  std::vector<double> x = channel_features(inst);
  if (config.normalize_features) {
    const double rms =
        std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / x.size());
    if (rms > 0.0) {
      for (double& v : x) v /= rms;
    }
  }
  return x;
}

LossAndGrad unsupervised_loss(const ProblemInstance& inst, const MlpModel& model) {
  BeamVector w = infer(model, channel_features(inst));
  repair_degenerate(inst, w);
  return projection_loss(inst, w, ProjectionMode::Always);
}

LossAndGrad penalty_loss(const ProblemInstance& inst, const MlpModel& model, double coeff) {
  return penalty_loss(inst, infer(model, channel_features(inst)), coeff);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool in_pretrain(const TrainConfig& c, int epoch) {
  return c.variant == Variant::ProjPretrain && epoch < c.pretrain_epochs;
}

ProjectionMode training_mode(const TrainConfig& c) {
  return c.variant == Variant::ProjUnfeasible ? ProjectionMode::IfInfeasible
                                              : ProjectionMode::Always;
}

// Loss for one sample in the current phase.
LossAndGrad phase_loss(const ProblemInstance& inst, const BeamVector& w, const TrainConfig& c,
                       int epoch) {
  if (in_pretrain(c, epoch)) return penalty_loss(inst, w, c.penalty_coeff);
  return projection_loss(inst, w, training_mode(c));
}

// Counts consecutive epochs whose solution moved by at most eps (squared norm).
class EarlyStop {
 public:
  EarlyStop(double eps, int patience) : eps_(eps), patience_(patience) {}

  // Returns true once the rule has held for `patience` consecutive epochs.
  bool update(const std::vector<double>& solution) {
    if (patience_ == 0) return false;
    if (!previous_.empty()) {
      double d = 0.0;
      for (std::size_t j = 0; j < solution.size(); ++j) {
        const double e = solution[j] - previous_[j];
        d += e * e;
      }
      streak_ = d <= eps_ ? streak_ + 1 : 0;
    }
    previous_ = solution;
    return streak_ >= patience_;
  }

  void reset() {
    previous_.clear();
    streak_ = 0;
  }

 private:
  double eps_;
  int patience_;
  int streak_ = 0;
  std::vector<double> previous_;
};

void finish_evaluation(const MlpModel& model, std::span<const ProblemInstance> eval,
                       const TrainConfig& config, TrainReport& report) {
  const std::vector<BeamVector> solutions = solve_with_model(model, eval, config);
  std::size_t feasible = 0;
  double power = 0.0;
  for (std::size_t k = 0; k < solutions.size(); ++k) {
    if (is_feasible(eval[k], solutions[k])) ++feasible;
    power += objective(solutions[k]);
  }
  report.feasibility_rate = static_cast<double>(feasible) / static_cast<double>(solutions.size());
  report.final_mean_power = power / static_cast<double>(solutions.size());
}

}  // namespace

std::vector<BeamVector> solve_with_model(const MlpModel& model,
                                         std::span<const ProblemInstance> instances,
                                         const TrainConfig& config) {
  std::vector<BeamVector> out;
  out.reserve(instances.size());
  for (const ProblemInstance& inst : instances) {
    BeamVector w = infer(model, model_features(inst, config));
    repair_degenerate(inst, w);
    out.push_back(scale_always(inst, w).projected);
  }
  return out;
}

TrainOutcome train_single(const ProblemInstance& inst, const TrainConfig& config) {
  config.validate();
  const auto start = Clock::now();
  MlpModel model = MlpModel::init(
      default_layer_dims(inst.n_antennas(), inst.n_users(), config.hidden, config.hidden_layers),
      config.seed);
  AdamState adam(model, config.learning_rate);
  const std::vector<double> x = model_features(inst, config);

  TrainReport report;
  report.variant = config.variant;
  report.mode = "single";
  report.n_antennas = inst.n_antennas();
  report.n_users = inst.n_users();
  report.n_train = 1;
  report.n_test = 1;

  EarlyStop stopper(config.early_stop_eps, config.early_stop_patience);
  try {
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
      ForwardResult fw = forward(model, x);
      report.degenerate_events += repair_degenerate(inst, fw.w);
      const LossAndGrad lg = phase_loss(inst, fw.w, config, epoch);
      if (!std::isfinite(lg.loss)) throw TrainingDiverged("non-finite loss");
      const ProjectionResult eval = scale_always(inst, fw.w);
      report.train_loss.push_back(lg.loss);
      report.test_loss.push_back(objective(eval.projected));
      report.epochs_run = epoch + 1;
      if (in_pretrain(config, epoch)) {
        report.pretrain_epochs_run = epoch + 1;
      } else {
        const auto p = eval.projected.real_params();
        if (stopper.update(std::vector<double>(p.begin(), p.end()))) {
          report.stop_reason = StopReason::EarlyStop;
          break;
        }
      }
      const ModelGradients grads = backward(model, fw.cache, lg.grad_w);
      adam_step(model, grads, adam);
    }
    finish_evaluation(model, std::span(&inst, 1), config, report);
  } catch (const TrainingDiverged& e) {
    report.stop_reason = StopReason::Diverged;
    report.error = e.what();
  }
  report.wall_seconds = seconds_since(start);
  return {std::move(model), std::move(report)};
}

TrainOutcome train_dataset(std::span<const ProblemInstance> instances, const TrainConfig& config) {
  config.validate();
  if (instances.size() < 2) throw UsageError("train_dataset: need at least two instances");
  const std::size_t n = instances.front().n_antennas();
  const std::size_t m = instances.front().n_users();
  for (const ProblemInstance& inst : instances) {
    if (inst.n_antennas() != n || inst.n_users() != m) {
      throw UsageError("train_dataset: all instances must share (N, M)");
    }
  }
  const auto start = Clock::now();

  const DatasetSplit parts = split(instances.size(), config.split_ratio, config.seed);
  std::vector<ProblemInstance> train_set, test_set;
  for (std::size_t i : parts.train) train_set.push_back(instances[i]);
  for (std::size_t i : parts.test) test_set.push_back(instances[i]);
  std::vector<std::vector<double>> train_x, test_x;
  for (const ProblemInstance& inst : train_set) train_x.push_back(model_features(inst, config));
  for (const ProblemInstance& inst : test_set) test_x.push_back(model_features(inst, config));

  MlpModel model = MlpModel::init(default_layer_dims(n, m, config.hidden, config.hidden_layers),
                                  config.seed);
  AdamState adam(model, config.learning_rate);

  TrainReport report;
  report.variant = config.variant;
  report.mode = "dataset";
  report.n_antennas = n;
  report.n_users = m;
  report.n_train = train_set.size();
  report.n_test = test_set.size();

  // Fixed chunking of each batch: the reduction order depends only on the
  // batch, never on how many workers run.
  constexpr std::size_t kChunks = 8;
  std::vector<ModelGradients> chunk_grads(kChunks, ModelGradients::zeros_like(model));
  std::vector<double> chunk_loss(kChunks);
  std::vector<std::size_t> chunk_events(kChunks);
  ModelGradients batch_grad = ModelGradients::zeros_like(model);

  EarlyStop stopper(config.early_stop_eps, config.early_stop_patience);
  std::vector<std::size_t> order(train_set.size());
  try {
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      if (config.shuffle) {
        RandomStream rng(config.seed, StreamDomain::Shuffle, static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      }
      double epoch_loss = 0.0;
      for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
        const std::size_t b1 = std::min(order.size(), b0 + config.batch_size);
        const double inv = 1.0 / static_cast<double>(b1 - b0);
        const std::size_t chunk_len = (b1 - b0 + kChunks - 1) / kChunks;
        parallel_for(kChunks, [&](std::size_t c) {
          chunk_grads[c].set_zero();
          chunk_loss[c] = 0.0;
          chunk_events[c] = 0;
          const std::size_t lo = std::min(b1, b0 + c * chunk_len);
          const std::size_t hi = std::min(b1, lo + chunk_len);
          for (std::size_t k = lo; k < hi; ++k) {
            const std::size_t s = order[k];
            ForwardResult fw = forward(model, train_x[s]);
            chunk_events[c] += repair_degenerate(train_set[s], fw.w);
            const LossAndGrad lg = phase_loss(train_set[s], fw.w, config, epoch);
            chunk_loss[c] += lg.loss;
            backward_accumulate(model, fw.cache, lg.grad_w, inv, chunk_grads[c]);
          }
        });
        batch_grad.set_zero();
        for (std::size_t c = 0; c < kChunks; ++c) {
          batch_grad += chunk_grads[c];
          epoch_loss += chunk_loss[c];
          report.degenerate_events += chunk_events[c];
        }
        adam_step(model, batch_grad, adam);
      }
      if (!std::isfinite(epoch_loss)) throw TrainingDiverged("non-finite loss");
      report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

      std::vector<double> mean_solution(2 * n, 0.0);
      double test_power = 0.0;
      for (std::size_t s = 0; s < test_set.size(); ++s) {
        BeamVector w = infer(model, test_x[s]);
        repair_degenerate(test_set[s], w);
        const BeamVector tw = scale_always(test_set[s], w).projected;
        test_power += objective(tw);
        const auto p = tw.real_params();
        for (std::size_t j = 0; j < p.size(); ++j) mean_solution[j] += p[j];
      }
      for (double& v : mean_solution) v /= static_cast<double>(test_set.size());
      report.test_loss.push_back(test_power / static_cast<double>(test_set.size()));
      report.epochs_run = epoch + 1;
      if (in_pretrain(config, epoch)) {
        report.pretrain_epochs_run = epoch + 1;
      } else if (stopper.update(mean_solution)) {
        report.stop_reason = StopReason::EarlyStop;
        break;
      }
    }
    finish_evaluation(model, test_set, config, report);
  } catch (const TrainingDiverged& e) {
    report.stop_reason = StopReason::Diverged;
    report.error = e.what();
  }
  report.wall_seconds = seconds_since(start);
  return {std::move(model), std::move(report)};
}

}  // namespace beamproj
