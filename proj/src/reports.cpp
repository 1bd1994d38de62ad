#include "beamproj/reports.hpp"

#include <json.hpp>
#include <sstream>

#include "beamproj/data_io.hpp"

namespace beamproj {

using json = nlohmann::json;

namespace {

json beam_to_json(const BeamVector& w) {
  const auto re = w.vec().re(), im = w.vec().im();
  return {{"re", std::vector<double>(re.begin(), re.end())},
          {"im", std::vector<double>(im.begin(), im.end())}};
}

}  // namespace

std::string train_report_to_json(const TrainReport& r, bool timing,
                                 std::optional<double> analytic_optimum) {
  json doc;
  doc["format"] = "beamproj-train-report";
  doc["schema_version"] = kSchemaVersion;
  doc["variant"] = to_string(r.variant);
  doc["mode"] = r.mode;
  doc["n_antennas"] = r.n_antennas;
  doc["n_users"] = r.n_users;
  doc["n_train"] = r.n_train;
  doc["n_test"] = r.n_test;
  doc["epochs_run"] = r.epochs_run;
  doc["pretrain_epochs_run"] = r.pretrain_epochs_run;
  doc["train_loss"] = r.train_loss;
  doc["test_loss"] = r.test_loss;
  doc["wall_seconds"] = timing ? r.wall_seconds : 0.0;
  doc["feasibility_rate"] = r.feasibility_rate;
  doc["final_mean_power"] = r.final_mean_power;
  doc["stop_reason"] = to_string(r.stop_reason);
  doc["degenerate_events"] = r.degenerate_events;
  doc["error"] = r.error;
  if (analytic_optimum) {
    doc["analytic_optimum"] = *analytic_optimum;
    doc["relative_gap_to_optimum"] = (r.final_mean_power - *analytic_optimum) / *analytic_optimum;
  }
  return doc.dump(1) + "\n";
}

std::string sdr_result_to_json(const SdrResult& r) {
  const std::size_t n = r.w_star.dim();
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> rr(n), ii(n);
    for (std::size_t j = 0; j < n; ++j) {
      rr[j] = r.w_star(i, j).real();
      ii[j] = r.w_star(i, j).imag();
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  json doc;
  doc["format"] = "beamproj-sdr-result";
  doc["schema_version"] = kSchemaVersion;
  doc["w_star"] = {{"re", re}, {"im", im}};
  doc["lower_bound"] = r.lower_bound;
  doc["solver_iters"] = r.solver_iters;
  doc["primal_residual"] = r.primal_residual;
  doc["dual_residual"] = r.dual_residual;
  doc["converged"] = r.converged;
  doc["dual_bound"] = r.dual_bound;
  doc["duality_gap"] = r.duality_gap;
  doc["randomization_samples"] = r.randomization_samples;
  doc["best_w"] = r.best_w ? beam_to_json(*r.best_w) : json(nullptr);
  doc["upper_bound"] = r.upper_bound ? json(*r.upper_bound) : json(nullptr);
  return doc.dump(1) + "\n";
}

std::string oracle_report_to_json(const OracleReport& r, bool timing) {
  json doc;
  doc["format"] = "beamproj-oracle-report";
  doc["schema_version"] = kSchemaVersion;
  doc["method"] = r.method;
  doc["instance_digest"] = r.instance_digest;
  doc["best_power"] = r.best_power;
  doc["best_w"] = beam_to_json(r.best_w);
  doc["samples"] = r.samples;
  doc["resolution"] = r.resolution;
  doc["slack"] = r.slack;
  doc["wall_seconds"] = timing ? r.wall_seconds : 0.0;
  return doc.dump(1) + "\n";
}

std::string loss_csv(const TrainReport& r) {
  std::ostringstream out;
  out << "epoch,train_loss,test_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out << e << ',' << format_double(r.train_loss[e]) << ','
        << (e < r.test_loss.size() ? format_double(r.test_loss[e]) : std::string()) << '\n';
  }
  return out.str();
}

const char* const kBenchCsvHeader =
    "experiment,variant,n,m,gamma_db,seed,final_power,sdr_lower_bound,sdr_upper_bound,"
    "train_seconds,inference_microseconds,feasible,note";

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << kBenchCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const BenchRow& r : rows) {
    std::string note = r.note;
    for (char& c : note) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out << r.experiment << ',' << r.variant << ',' << r.n << ',' << r.m << ','
        << format_double(r.gamma_db) << ',' << r.seed << ',' << format_double(r.final_power) << ','
        << opt(r.sdr_lower_bound) << ',' << opt(r.sdr_upper_bound) << ','
        << format_double(r.train_seconds) << ',' << format_double(r.inference_microseconds) << ','
        << (r.feasible ? "true" : "false") << ',' << note << '\n';
  }
  return out.str();
}

}  // namespace beamproj
