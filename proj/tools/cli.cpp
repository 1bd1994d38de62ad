#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <ostream>

#include "beamproj/bench.hpp"
#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/reports.hpp"
#include "beamproj/trainer.hpp"

namespace beamproj::cli {

namespace fs = std::filesystem;

namespace {

struct GenArgs {
  std::size_t n = 4;
  std::size_t m = 3;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::vector<double> gamma_db{10.0};
  std::vector<double> sigma_sq{1.0};
  std::string channel_model = "complex-gaussian";
  std::string out;
};

struct TrainArgs {
  std::string dataset;
  std::string variant = "proj-all";
  std::string mode = "single";
  std::size_t instance = 0;
  int max_epochs = 1000;
  int pretrain_epochs = 100;
  std::optional<double> lr;
  std::size_t hidden = 512;
  std::size_t layers = 2;
  std::size_t batch_size = 500;
  std::optional<int> patience;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool no_timing = false;
};

struct SweepArgs {
  std::string axis = "m";
  std::vector<double> values;
  bool full = false;
  std::size_t n = 4;
  std::size_t m = 8;
  double gamma_db = 10.0;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> variants{"proj-unfeasible", "proj-all", "proj-pretrain"};
  int max_epochs = 1000;
  int pretrain_epochs = 100;
  double lr = 5e-4;
  std::size_t hidden = 512;
  std::size_t layers = 2;
  int patience = 0;
  bool no_sdr = false;
  std::size_t randomizations = kDefaultRandomizations;
  std::string channel_model = "complex-gaussian";
  std::string out;
  bool no_timing = false;
};

struct BenchArgs {
  std::string checkpoint;
  std::size_t n = 0;
  std::size_t m = 0;
  double gamma_db = 10.0;
  std::uint64_t seed = 0;
  std::size_t repetitions = 1000;
  bool sweep = false;
  std::vector<std::size_t> ns{8, 16, 32};
  std::vector<std::size_t> ms{16, 32, 64};
  std::size_t hidden = 64;
  std::size_t layers = 1;
  std::string out;
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (a.out.empty()) throw UsageError("gen: --out is required");
  DatasetSpec spec;
  spec.n_instances = a.count;
  spec.n_antennas = a.n;
  spec.n_users = a.m;
  spec.gamma_db = a.gamma_db;
  spec.sigma_sq = a.sigma_sq;
  spec.channel_model = channel_model_from_string(a.channel_model);
  spec.seed = a.seed;
  save_dataset(a.out, gen_dataset(spec));
  out << "wrote " << a.count << " instances to " << a.out << '\n';
  return kOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.out_dir.empty()) throw UsageError("train: --out-dir is required");
  if (a.mode != "single" && a.mode != "dataset") {
    throw UsageError("train: --mode must be single or dataset");
  }
  const Dataset data = load_dataset(a.dataset);
  if (data.instances.empty()) throw UsageError("train: dataset has no instances");

  TrainConfig cfg = a.mode == "dataset" ? TrainConfig::dataset_defaults() : TrainConfig{};
  cfg.variant = variant_from_string(a.variant);
  cfg.max_epochs = a.max_epochs;
  cfg.pretrain_epochs = a.pretrain_epochs;
  if (a.lr) cfg.learning_rate = *a.lr;
  cfg.hidden = a.hidden;
  cfg.hidden_layers = a.layers;
  cfg.batch_size = a.batch_size;
  // The per-instance protocol runs the full epoch budget.
  cfg.early_stop_patience = a.patience.value_or(a.mode == "single" ? 0 : 10);
  cfg.seed = a.seed;
  if (data.spec) cfg.split_ratio = data.spec->split_ratio;

  std::optional<TrainOutcome> outcome;
  std::optional<double> optimum;
  if (a.mode == "single") {
    if (a.instance >= data.instances.size()) {
      throw UsageError("train: --instance out of range");
    }
    const ProblemInstance& inst = data.instances[a.instance];
    if (inst.n_users() == 1) optimum = single_user_optimum(inst).power;
    outcome = train_single(inst, cfg);
  } else {
    outcome = train_dataset(data.instances, cfg);
  }

  const fs::path dir(a.out_dir);
  const bool timing = !a.no_timing;
  const TrainReport& r = outcome->report;
  write_text_file(dir / "report.json", train_report_to_json(r, timing, optimum));
  write_text_file(dir / "loss.csv", loss_csv(r));
  // A diverged model may hold non-finite weights, which no checkpoint can carry.
  if (r.stop_reason != StopReason::Diverged) save_checkpoint(dir / "model.json", outcome->model);

  out << to_string(r.variant) << ' ' << r.mode << ": " << r.epochs_run << " epochs ("
      << to_string(r.stop_reason) << "), final power " << format_double(r.final_mean_power)
      << '\n';
  if (r.stop_reason == StopReason::Diverged) {
    err << "error: training diverged: " << r.error << '\n';
    return kNumerical;
  }
  return kOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  SweepOptions opts;
  opts.axis = sweep_axis_from_string(a.axis);
  opts.values = a.values;
  opts.n_antennas = a.n;
  opts.n_users = a.m;
  opts.gamma_db = a.gamma_db;
  if (a.full) {
    if (!a.values.empty()) throw UsageError("sweep: --full and --values are exclusive");
    apply_full_grid(opts);
  }
  opts.seeds = a.seeds;
  opts.base_seed = a.seed;
  opts.variants.clear();
  for (const std::string& v : a.variants) opts.variants.push_back(variant_from_string(v));
  opts.train.max_epochs = a.max_epochs;
  opts.train.pretrain_epochs = a.pretrain_epochs;
  opts.train.learning_rate = a.lr;
  opts.train.hidden = a.hidden;
  opts.train.hidden_layers = a.layers;
  opts.train.early_stop_patience = a.patience;
  opts.channel_model = channel_model_from_string(a.channel_model);
  opts.run_sdr = !a.no_sdr;
  opts.randomizations = a.randomizations;
  opts.timing = !a.no_timing;

  const SweepResult res = run_sweep(opts);
  for (const std::string& w : res.warnings) err << "warning: " << w << '\n';
  emit(a.out, bench_csv(res.rows), out);
  const bool all_ok = std::all_of(res.rows.begin(), res.rows.end(),
                                  [](const BenchRow& r) { return r.feasible; });
  if (!all_ok) {
    err << "error: some sweep rows failed (see note column)\n";
    return kNumerical;
  }
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.sweep) {
    const InferenceSweep s = inference_sweep(a.ns, a.ms, a.hidden, a.layers, a.repetitions, a.seed);
    emit(a.out, inference_csv(s.cells), out);
    out << "r2 " << format_double(s.r2) << '\n';
    return kOk;
  }
  if (a.checkpoint.empty()) throw UsageError("bench-inference: --checkpoint or --sweep required");
  const MlpModel model = load_checkpoint(a.checkpoint);
  DatasetSpec spec;
  spec.n_antennas = a.n;
  spec.n_users = a.m;
  // Default the shape to the one the checkpoint was trained for.
  if (spec.n_antennas == 0) spec.n_antennas = model.output_dim() / 2;
  if (spec.n_users == 0) spec.n_users = model.input_dim() / std::max<std::size_t>(1, model.output_dim());
  spec.gamma_db = {a.gamma_db};
  spec.seed = a.seed;
  const ProblemInstance inst = gen_instance(spec, 0);
  const InferenceTiming t = time_inference(model, inst, a.repetitions);
  nlohmann::json doc;
  doc["format"] = "beamproj-inference-timing";
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = t.n;
  doc["m"] = t.m;
  doc["repetitions"] = t.repetitions;
  doc["median_us"] = t.median_us;
  doc["p95_us"] = t.p95_us;
  emit(a.out, doc.dump(1) + "\n", out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned feasible beamforming: dataset generation, training and benchmarks"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded dataset file");
  g->add_option("--n", gen.n, "Antennas")->capture_default_str();
  g->add_option("--m", gen.m, "Users")->capture_default_str();
  g->add_option("--count", gen.count, "Instances")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--gamma-db", gen.gamma_db, "SNR target(s) in dB, one or one per user");
  g->add_option("--sigma-sq", gen.sigma_sq, "Noise variance(s), one or one per user");
  g->add_option("--channel-model", gen.channel_model, "complex-gaussian | abs-gaussian")
      ->capture_default_str();
  g->add_option("--out", gen.out, "Output dataset path")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model; writes model.json, report.json, loss.csv");
  t->add_option("--dataset", tr.dataset)->required();
  t->add_option("--variant", tr.variant, "proj-unfeasible | proj-all | proj-pretrain")
      ->capture_default_str();
  t->add_option("--mode", tr.mode, "single | dataset")->capture_default_str();
  t->add_option("--instance", tr.instance, "Instance index for single mode")->capture_default_str();
  t->add_option("--max-epochs", tr.max_epochs)->capture_default_str();
  t->add_option("--pretrain-epochs", tr.pretrain_epochs)->capture_default_str();
  t->add_option("--lr", tr.lr, "Learning rate (5e-4 single, 1e-3 dataset)");
  t->add_option("--hidden", tr.hidden)->capture_default_str();
  t->add_option("--layers", tr.layers, "Hidden layers")->capture_default_str();
  t->add_option("--batch-size", tr.batch_size)->capture_default_str();
  t->add_option("--patience", tr.patience, "Early-stop patience, 0 disables (0 single, 10 dataset)");
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--out-dir", tr.out_dir)->required();
  t->add_flag("--no-timing", tr.no_timing, "Write wall-clock fields as 0");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run an experiment grid; emits bench CSV");
  s->add_option("--axis", sw.axis, "m | n | gamma")->capture_default_str();
  s->add_option("--values", sw.values, "Axis values (default: desk-scale grid)");
  s->add_flag("--full", sw.full, "Use the full-scale grid (hours of CPU time)");
  s->add_option("--n", sw.n, "Antennas when not swept")->capture_default_str();
  s->add_option("--m", sw.m, "Users when not swept")->capture_default_str();
  s->add_option("--gamma-db", sw.gamma_db, "SNR target when not swept")->capture_default_str();
  s->add_option("--seeds", sw.seeds, "Seeds per value")->capture_default_str();
  s->add_option("--seed", sw.seed, "First seed")->capture_default_str();
  s->add_option("--variants", sw.variants)->capture_default_str();
  s->add_option("--max-epochs", sw.max_epochs)->capture_default_str();
  s->add_option("--pretrain-epochs", sw.pretrain_epochs)->capture_default_str();
  s->add_option("--lr", sw.lr)->capture_default_str();
  s->add_option("--hidden", sw.hidden)->capture_default_str();
  s->add_option("--layers", sw.layers)->capture_default_str();
  s->add_option("--patience", sw.patience, "Early-stop patience, 0 disables")->capture_default_str();
  s->add_flag("--no-sdr", sw.no_sdr, "Skip the SDR baseline");
  s->add_option("--randomizations", sw.randomizations)->capture_default_str();
  s->add_option("--channel-model", sw.channel_model)->capture_default_str();
  s->add_option("--out", sw.out, "CSV path (default stdout)");
  s->add_flag("--no-timing", sw.no_timing, "Write timing columns as 0");

  BenchArgs be;
  auto* b = app.add_subcommand("bench-inference", "Time forward pass plus projection");
  b->add_option("--checkpoint", be.checkpoint);
  b->add_option("--n", be.n, "Antennas (default: from checkpoint)");
  b->add_option("--m", be.m, "Users (default: from checkpoint)");
  b->add_option("--gamma-db", be.gamma_db)->capture_default_str();
  b->add_option("--seed", be.seed)->capture_default_str();
  b->add_option("--repetitions", be.repetitions)->capture_default_str();
  b->add_flag("--sweep", be.sweep, "Time fresh models over an N x M grid and fit vs N*M");
  b->add_option("--ns", be.ns)->capture_default_str();
  b->add_option("--ms", be.ms)->capture_default_str();
  b->add_option("--hidden", be.hidden, "Sweep hidden width")->capture_default_str();
  b->add_option("--layers", be.layers, "Sweep hidden layers")->capture_default_str();
  b->add_option("--out", be.out, "Output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*t) return cmd_train(tr, out, err);
    if (*s) return cmd_sweep(sw, out, err);
    if (*b) return cmd_bench(be, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const MalformedDataset& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const VersionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace beamproj::cli
