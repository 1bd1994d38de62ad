#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "beamproj/data_io.hpp"
#include "beamproj/mlp.hpp"
#include "beamproj/reports.hpp"
#include "beamproj/trainer.hpp"

namespace beamproj {

enum class SweepAxis { Users, Antennas, Gamma };
SweepAxis sweep_axis_from_string(const std::string& s);  // "m", "n", "gamma"
std::string to_string(SweepAxis a);

// SDR is skipped above this many antennas.
constexpr std::size_t kSdrMaxAntennas = 32;

struct SweepOptions {
  SweepAxis axis = SweepAxis::Users;
  std::vector<double> values;  // empty: desk-scale default for the axis
  std::size_t n_antennas = 4;
  std::size_t n_users = 8;
  double gamma_db = 10.0;
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  std::vector<Variant> variants{Variant::ProjUnfeasible, Variant::ProjAll, Variant::ProjPretrain};
  // Per-instance protocol: full epoch budget, no early stop.
  TrainConfig train = [] {
    TrainConfig c;
    c.early_stop_patience = 0;
    return c;
  }();
  ChannelModel channel_model = ChannelModel::ComplexGaussian;
  bool run_sdr = true;
  std::size_t randomizations = 100000;
  std::size_t oracle_samples = 0;  // random-direction baseline rows when > 0
  std::size_t inference_reps = 100;
  bool timing = true;
};

// Desk-scale grids: M in {4, 8, 16}, N in {2, 4, 8}, gamma in {5, 10, 15} dB.
std::vector<double> default_sweep_values(SweepAxis axis);
// Full-scale grids with their fixed dimensions applied to opts:
//   M in {40,...,200} at N = 50; N in {10,...,90} at M = 80;
//   gamma in {5,...,25} dB at N = 50, M = 80.
void apply_full_grid(SweepOptions& opts);

struct SweepResult {
  std::vector<BenchRow> rows;
  std::vector<std::string> warnings;
};

// One cell per (value, seed); cells run on the worker pool and rows are
// emitted in cell order, then variant order.
SweepResult run_sweep(const SweepOptions& opts);

struct InferenceTiming {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t repetitions = 0;
  double median_us = 0.0;
  double p95_us = 0.0;
};

// Wall time of infer + scale_always over `repetitions` calls.
InferenceTiming time_inference(const MlpModel& model, const ProblemInstance& inst,
                               std::size_t repetitions);

// Coefficient of determination of the least-squares line y ~ a + b x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

struct InferenceSweep {
  std::vector<InferenceTiming> cells;
  double r2 = 0.0;  // median time vs N*M
};

// Times freshly initialized models of the given hidden shape on every (N, M)
// cell of the grid.
InferenceSweep inference_sweep(const std::vector<std::size_t>& ns,
                               const std::vector<std::size_t>& ms, std::size_t hidden,
                               std::size_t hidden_layers, std::size_t repetitions,
                               std::uint64_t seed);

extern const char* const kInferenceCsvHeader;  // n,m,nm,repetitions,median_us,p95_us
std::string inference_csv(const std::vector<InferenceTiming>& cells);

}  // namespace beamproj
