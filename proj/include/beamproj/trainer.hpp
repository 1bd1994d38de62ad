#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "beamproj/mlp.hpp"
#include "beamproj/problem.hpp"
#include "beamproj/projection.hpp"

namespace beamproj {

// ProjUnfeasible: loss through the project-only-if-infeasible scaling.
// ProjAll: loss through the always-project scaling (scale-invariant objective).
// ProjPretrain: penalty-loss pretraining, then ProjAll.
enum class Variant { ProjUnfeasible, ProjAll, ProjPretrain };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);  // "proj-unfeasible", "proj-all", "proj-pretrain"

struct TrainConfig {
  Variant variant = Variant::ProjAll;
  double learning_rate = 5e-4;
  int max_epochs = 1000;
  int pretrain_epochs = 100;    // ProjPretrain only
  double penalty_coeff = 0.2;
  std::size_t batch_size = 500;  // dataset mode
  double early_stop_eps = 1e-3;
  int early_stop_patience = 10;  // 0 disables early stopping
  std::uint64_t seed = 0;
  std::size_t hidden = 512;
  std::size_t hidden_layers = 2;
  bool shuffle = true;
  bool normalize_features = false;
  double split_ratio = 0.8;

  // Learning rate 1e-3; everything else as above.
  static TrainConfig dataset_defaults();
  void validate() const;
};

enum class StopReason { MaxEpochs, EarlyStop, Diverged };
std::string to_string(StopReason r);

struct TrainReport {
  Variant variant = Variant::ProjAll;
  std::string mode;  // "single" or "dataset"
  std::size_t n_antennas = 0;
  std::size_t n_users = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  // Per epoch. train_loss is the variant's training objective; test_loss is
  // the always-projected power (single mode: of the one instance; dataset
  // mode: mean over the test split).
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  int epochs_run = 0;
  int pretrain_epochs_run = 0;
  double wall_seconds = 0.0;
  double feasibility_rate = 0.0;
  double final_mean_power = 0.0;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t degenerate_events = 0;
  std::string error;
};

struct TrainOutcome {
  MlpModel model;
  TrainReport report;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad_w;
};

// Training losses evaluated at a concrete network output.
LossAndGrad projection_loss(const ProblemInstance& inst, const BeamVector& w, ProjectionMode mode);
// ||w||^2 + coeff * sum_i max(0, gamma_i - |h_i^H w|^2 / sigma_i^2)
LossAndGrad penalty_loss(const ProblemInstance& inst, const BeamVector& w, double coeff);

// The same, evaluated at forward(model, channel_features(inst)).
LossAndGrad unsupervised_loss(const ProblemInstance& inst, const MlpModel& model);
LossAndGrad penalty_loss(const ProblemInstance& inst, const MlpModel& model, double coeff);

// Nudges w by 1e-6 * h_i / ||h_i|| for every user with |h_i^H w| < 1e-12 so
// both projections are defined. Returns the number of nudges applied.
std::size_t repair_degenerate(const ProblemInstance& inst, BeamVector& w);

// Network input for an instance under the given config.
std::vector<double> model_features(const ProblemInstance& inst, const TrainConfig& config);

// Always-projected solutions of the model on each instance. Every returned
// vector is feasible.
std::vector<BeamVector> solve_with_model(const MlpModel& model,
                                         std::span<const ProblemInstance> instances,
                                         const TrainConfig& config);

TrainOutcome train_single(const ProblemInstance& inst, const TrainConfig& config);
TrainOutcome train_dataset(std::span<const ProblemInstance> instances, const TrainConfig& config);

}  // namespace beamproj
