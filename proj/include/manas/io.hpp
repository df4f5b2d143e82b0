#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "manas/environment.hpp"
#include "manas/regret.hpp"
#include "manas/runner.hpp"

namespace manas {

// Shortest exact decimal form: parses back to the identical double.
std::string format_double(double v);

// trace.csv: round,loss,actions,probs with ';'-joined per-agent fields.
void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace);

// regret.csv columns: round,loss,instantaneous_regret,cumulative_regret,bound.
void write_regret_csv(const std::filesystem::path& path, const LossTrace& trace,
                      const RegretReport& report, const std::vector<double>& bound);

struct RegretCsvRow {
  std::int64_t round = 0;
  double loss = 0.0;
  double instantaneous_regret = 0.0;
  double cumulative_regret = 0.0;
  double bound = 0.0;
};
std::vector<RegretCsvRow> read_regret_csv(const std::filesystem::path& path);

nlohmann::json report_to_json(const RegretReport& report);
nlohmann::json trace_to_json(const LossTrace& trace);
nlohmann::json run_report_json(const RunResult& run, const RegretReport& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Figure CSV: round,mean_regret,std_regret.
void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& mean,
                     const std::vector<double>& stddev);
// bound.csv: round,bound.
void write_bound_csv(const std::filesystem::path& path, const std::vector<double>& bound);

// Tabular benchmark container (also carries linear beta schedules).
TabularBenchmark tabular_from_json(const nlohmann::json& j);
nlohmann::json tabular_to_json(const TabularBenchmark& bench);
TabularBenchmark load_tabular_benchmark(const std::filesystem::path& path);
void save_tabular_benchmark(const std::filesystem::path& path, const TabularBenchmark& bench);

}  // namespace manas
