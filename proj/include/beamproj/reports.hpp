#pragma once

#include <optional>
#include <string>
#include <vector>

#include "beamproj/oracle.hpp"
#include "beamproj/sdr.hpp"
#include "beamproj/trainer.hpp"

namespace beamproj {

// JSON documents. With timing = false every wall-clock field is written as 0
// so reruns are byte-identical.
std::string train_report_to_json(const TrainReport& report, bool timing = true,
                                 std::optional<double> analytic_optimum = std::nullopt);
std::string sdr_result_to_json(const SdrResult& result);
std::string oracle_report_to_json(const OracleReport& report, bool timing = true);

// epoch,train_loss,test_loss
std::string loss_csv(const TrainReport& report);

struct BenchRow {
  std::string experiment;
  std::string variant;
  std::size_t n = 0;
  std::size_t m = 0;
  double gamma_db = 0.0;
  std::uint64_t seed = 0;
  double final_power = 0.0;
  std::optional<double> sdr_lower_bound;
  std::optional<double> sdr_upper_bound;
  double train_seconds = 0.0;
  double inference_microseconds = 0.0;
  bool feasible = false;
  std::string note;  // failure message for rows whose cell errored
};

extern const char* const kBenchCsvHeader;
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace beamproj
