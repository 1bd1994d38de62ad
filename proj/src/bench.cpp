#include "beamproj/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "beamproj/errors.hpp"
#include "beamproj/oracle.hpp"
#include "beamproj/parallel.hpp"
#include "beamproj/projection.hpp"
#include "beamproj/sdr.hpp"

namespace beamproj {

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "m") return SweepAxis::Users;
  if (s == "n") return SweepAxis::Antennas;
  if (s == "gamma") return SweepAxis::Gamma;
  throw UsageError("unknown sweep axis '" + s + "' (expected m, n, gamma)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Users: return "m";
    case SweepAxis::Antennas: return "n";
    case SweepAxis::Gamma: return "gamma";
  }
  return "unknown";
}

std::vector<double> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Users: return {4, 8, 16};
    case SweepAxis::Antennas: return {2, 4, 8};
    case SweepAxis::Gamma: return {5, 10, 15};
  }
  return {};
}

void apply_full_grid(SweepOptions& opts) {
  opts.gamma_db = 10.0;
  switch (opts.axis) {
    case SweepAxis::Users:
      opts.n_antennas = 50;
      opts.values = {40, 80, 120, 160, 200};
      break;
    case SweepAxis::Antennas:
      opts.n_users = 80;
      opts.values = {10, 30, 50, 70, 90};
      break;
    case SweepAxis::Gamma:
      opts.n_antennas = 50;
      opts.n_users = 80;
      opts.values = {5, 10, 15, 20, 25};
      break;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw UsageError(std::string("sweep: ") + what + " values must be positive integers");
  }
  return static_cast<std::size_t>(v);
}

struct Cell {
  double value = 0.0;
  std::uint64_t seed = 0;
};

std::vector<BenchRow> run_cell(const SweepOptions& opts, const Cell& cell,
                               std::vector<std::string>& warnings) {
  DatasetSpec spec;
  spec.n_antennas = opts.n_antennas;
  spec.n_users = opts.n_users;
  spec.gamma_db = {opts.gamma_db};
  spec.channel_model = opts.channel_model;
  spec.seed = cell.seed;
  switch (opts.axis) {
    case SweepAxis::Users: spec.n_users = as_count(cell.value, "m"); break;
    case SweepAxis::Antennas: spec.n_antennas = as_count(cell.value, "n"); break;
    case SweepAxis::Gamma: spec.gamma_db = {cell.value}; break;
  }
  const ProblemInstance inst = gen_instance(spec, 0);

  BenchRow base;
  base.experiment = "sweep-" + to_string(opts.axis);
  base.n = spec.n_antennas;
  base.m = spec.n_users;
  base.gamma_db = spec.gamma_db.front();
  base.seed = cell.seed;

  std::optional<SdrResult> sdr;
  double sdr_seconds = 0.0;
  std::string sdr_error;
  if (opts.run_sdr) {
    if (spec.n_antennas > kSdrMaxAntennas) {
      std::ostringstream w;
      w << "SDR skipped for N = " << spec.n_antennas << " (> " << kSdrMaxAntennas << ")";
      warnings.push_back(w.str());
    } else {
      const auto t0 = Clock::now();
      try {
        sdr = solve_sdr_randomized(inst, SdrOptions{}, opts.randomizations, cell.seed);
        if (!sdr->converged) {
          warnings.push_back("SDR not converged for seed " + std::to_string(cell.seed));
        }
      } catch (const Error& e) {
        sdr_error = e.what();
      }
      sdr_seconds = since(t0);
    }
  }
  if (sdr) {
    base.sdr_lower_bound = sdr->lower_bound;
    base.sdr_upper_bound = sdr->upper_bound;
  }

  std::vector<BenchRow> rows;
  for (Variant v : opts.variants) {
    BenchRow row = base;
    row.variant = to_string(v);
    try {
      TrainConfig cfg = opts.train;
      cfg.variant = v;
      cfg.seed = cell.seed;
      const TrainOutcome out = train_single(inst, cfg);
      const BeamVector w = solve_with_model(out.model, std::span(&inst, 1), cfg).front();
      row.final_power = objective(w);
      row.feasible = is_feasible(inst, w);
      row.note = out.report.error;
      if (opts.timing) {
        row.train_seconds = out.report.wall_seconds;
        row.inference_microseconds =
            time_inference(out.model, inst, opts.inference_reps).median_us;
      }
    } catch (const Error& e) {
      row.note = e.what();
      row.feasible = false;
    }
    rows.push_back(std::move(row));
  }
  if (opts.run_sdr && spec.n_antennas <= kSdrMaxAntennas) {
    BenchRow row = base;
    row.variant = "sdr-randomization";
    if (sdr) {
      row.final_power = *sdr->upper_bound;
      row.feasible = is_feasible(inst, *sdr->best_w);
      if (opts.timing) row.train_seconds = sdr_seconds;
    } else {
      row.note = sdr_error;
    }
    rows.push_back(std::move(row));
  }
  if (opts.oracle_samples > 0) {
    BenchRow row = base;
    row.variant = "random-direction";
    const OracleReport rep = random_direction_search(inst, opts.oracle_samples, cell.seed);
    row.final_power = rep.best_power;
    row.feasible = is_feasible(inst, rep.best_w);
    if (opts.timing) row.train_seconds = rep.wall_seconds;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SweepResult run_sweep(const SweepOptions& opts) {
  if (opts.seeds == 0) throw UsageError("sweep: need at least one seed");
  if (opts.variants.empty() && !opts.run_sdr && opts.oracle_samples == 0) {
    throw UsageError("sweep: nothing to run");
  }
  for (Variant v : opts.variants) {
    TrainConfig cfg = opts.train;
    cfg.variant = v;
    cfg.validate();
  }
  const std::vector<double> values =
      opts.values.empty() ? default_sweep_values(opts.axis) : opts.values;
  std::vector<Cell> cells;
  for (double v : values) {
    for (std::size_t s = 0; s < opts.seeds; ++s) cells.push_back({v, opts.base_seed + s});
  }
  // Validate cell values up front so a bad flag is a usage error, not a row.
  for (const Cell& c : cells) {
    if (opts.axis == SweepAxis::Users) as_count(c.value, "m");
    if (opts.axis == SweepAxis::Antennas) as_count(c.value, "n");
  }

  std::vector<std::vector<BenchRow>> cell_rows(cells.size());
  std::vector<std::vector<std::string>> cell_warnings(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    cell_rows[k] = run_cell(opts, cells[k], cell_warnings[k]);
  });

  SweepResult result;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    result.rows.insert(result.rows.end(), cell_rows[k].begin(), cell_rows[k].end());
    result.warnings.insert(result.warnings.end(), cell_warnings[k].begin(),
                           cell_warnings[k].end());
  }
  return result;
}

InferenceTiming time_inference(const MlpModel& model, const ProblemInstance& inst,
                               std::size_t repetitions) {
  if (repetitions == 0) throw UsageError("time_inference: repetitions must be positive");
  if (model.input_dim() != 2 * inst.n_antennas() * inst.n_users() ||
      model.output_dim() != 2 * inst.n_antennas()) {
    throw UsageError("time_inference: model shape does not match instance (N, M)");
  }
  const std::vector<double> x = channel_features(inst);
  std::vector<double> samples(repetitions);
  double sink = 0.0;
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto t0 = Clock::now();
    const BeamVector w = infer(model, x);
    const ProjectionResult p = scale_always(inst, w);
    sink += p.t;
    samples[r] = since(t0) * 1e6;
  }
  if (!std::isfinite(sink)) throw Error("time_inference: non-finite output");
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(repetitions))) - 1;
    return samples[std::min(idx, repetitions - 1)];
  };
  InferenceTiming t;
  t.n = inst.n_antennas();
  t.m = inst.n_users();
  t.repetitions = repetitions;
  t.median_us = quantile(0.5);
  t.p95_us = quantile(0.95);
  return t;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("linear_fit_r2: need >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

InferenceSweep inference_sweep(const std::vector<std::size_t>& ns,
                               const std::vector<std::size_t>& ms, std::size_t hidden,
                               std::size_t hidden_layers, std::size_t repetitions,
                               std::uint64_t seed) {
  InferenceSweep out;
  std::vector<double> nm, t;
  for (std::size_t n : ns) {
    for (std::size_t m : ms) {
      DatasetSpec spec;
      spec.n_antennas = n;
      spec.n_users = m;
      spec.seed = seed;
      const ProblemInstance inst = gen_instance(spec, 0);
      const MlpModel model = MlpModel::init(default_layer_dims(n, m, hidden, hidden_layers), seed);
      out.cells.push_back(time_inference(model, inst, repetitions));
      nm.push_back(static_cast<double>(n * m));
      t.push_back(out.cells.back().median_us);
    }
  }
  out.r2 = linear_fit_r2(nm, t);
  return out;
}

const char* const kInferenceCsvHeader = "n,m,nm,repetitions,median_us,p95_us";

std::string inference_csv(const std::vector<InferenceTiming>& cells) {
  std::ostringstream out;
  out << kInferenceCsvHeader << '\n';
  for (const InferenceTiming& c : cells) {
    out << c.n << ',' << c.m << ',' << c.n * c.m << ',' << c.repetitions << ','
        << format_double(c.median_us) << ',' << format_double(c.p95_us) << '\n';
  }
  return out.str();
}

}  // namespace beamproj
