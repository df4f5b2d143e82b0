#include "manas/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace manas {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline games
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

void reject_unknown_fields(const json& j, const std::vector<std::string>& known,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace) {
  std::ofstream out = open_out(path);
  out << "round,loss,actions,probs\n";
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const TraceRound& r = trace.rounds[t];
    out << (t + 1) << ',' << format_double(r.loss) << ',' << join_ints(r.action.actions) << ','
        << join_doubles(r.chosen_prob) << '\n';
  }
}

void write_regret_csv(const std::filesystem::path& path, const LossTrace& trace,
                      const RegretReport& report, const std::vector<double>& bound) {
  std::ofstream out = open_out(path);
  out << "round,loss,instantaneous_regret,cumulative_regret,bound\n";
  double cumulative = 0.0;
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    cumulative += report.per_round[t];
    double b = t < bound.size() ? bound[t] : 0.0;
    out << (t + 1) << ',' << format_double(trace.rounds[t].loss) << ','
        << format_double(report.per_round[t]) << ',' << format_double(cumulative) << ','
        << format_double(b) << '\n';
  }
}

std::vector<RegretCsvRow> read_regret_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "round,loss,instantaneous_regret,cumulative_regret,bound")
    throw Error("unexpected regret csv header in " + path.string());
  std::vector<RegretCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RegretCsvRow row;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    row.round = std::stoll(field);
    std::getline(ss, field, ',');
    row.loss = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.instantaneous_regret = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.cumulative_regret = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.bound = std::strtod(field.c_str(), nullptr);
    rows.push_back(row);
  }
  return rows;
}

json report_to_json(const RegretReport& report) {
  json j;
  j["cumulative_regret"] = report.cumulative_regret;
  j["simple_regret"] = report.simple_regret ? json(*report.simple_regret) : json(nullptr);
  j["per_round"] = report.per_round;
  j["best_hindsight_action"] = report.best_hindsight_action.actions;
  j["oracle_min"] = report.oracle_min;
  j["negative_regret_noise"] = report.negative_regret_noise;
  if (report.per_agent) j["per_agent"] = *report.per_agent;
  if (report.theoretical_bound_curve) j["theoretical_bound_curve"] = *report.theoretical_bound_curve;
  if (report.complexity_h) {
    j["complexity_h"] = *report.complexity_h;
    j["complexity_degenerate"] = report.complexity_degenerate;
  }
  return j;
}

json trace_to_json(const LossTrace& trace) {
  json rounds = json::array();
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const TraceRound& r = trace.rounds[t];
    rounds.push_back(json{{"round", t + 1},
                          {"action", r.action.actions},
                          {"loss", r.loss},
                          {"probs", r.chosen_prob}});
  }
  json j;
  j["rounds"] = std::move(rounds);
  if (!trace.snapshots.empty()) {
    json snaps = json::array();
    for (const auto& s : trace.snapshots)
      snaps.push_back(json{{"round", s.round}, {"scores", s.scores}});
    j["snapshots"] = std::move(snaps);
  }
  return j;
}

json run_report_json(const RunResult& run, const RegretReport& report) {
  json j;
  j["recommendation"] = run.recommendation.actions;
  j["regret"] = report_to_json(report);
  j["trace"] = trace_to_json(run.trace);
  if (!run.ok()) j["error"] = run.error;
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return j;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& mean,
                     const std::vector<double>& stddev) {
  std::ofstream out = open_out(path);
  out << "round,mean_regret,std_regret\n";
  for (std::size_t t = 0; t < mean.size(); ++t) {
    double s = t < stddev.size() ? stddev[t] : 0.0;
    out << (t + 1) << ',' << format_double(mean[t]) << ',' << format_double(s) << '\n';
  }
}

void write_bound_csv(const std::filesystem::path& path, const std::vector<double>& bound) {
  std::ofstream out = open_out(path);
  out << "round,bound\n";
  for (std::size_t t = 0; t < bound.size(); ++t)
    out << (t + 1) << ',' << format_double(bound[t]) << '\n';
}

TabularBenchmark tabular_from_json(const json& j) {
  reject_unknown_fields(j, {"num_agents", "num_actions", "entries", "beta_schedule"}, "");
  if (!j.contains("num_agents")) throw ConfigError("num_agents", "missing");
  if (!j.contains("num_actions")) throw ConfigError("num_actions", "missing");
  TabularBenchmark bench;
  bench.topology = Topology(j.at("num_agents").get<int>(), j.at("num_actions").get<int>());
  if (j.contains("entries")) {
    if (!j.at("entries").is_array()) throw ConfigError("entries", "must be an array");
    for (std::size_t idx = 0; idx < j.at("entries").size(); ++idx) {
      const json& e = j.at("entries")[idx];
      const std::string where = "entries[" + std::to_string(idx) + "]";
      reject_unknown_fields(e, {"actions", "loss_mean", "loss_std"}, where);
      if (!e.contains("actions")) throw ConfigError(where + ".actions", "missing");
      if (!e.contains("loss_mean")) throw ConfigError(where + ".loss_mean", "missing");
      std::vector<int> actions = e.at("actions").get<std::vector<int>>();
      require_valid(JointAction{actions}, bench.topology);
      TabularEntry entry;
      entry.mean = e.at("loss_mean").get<double>();
      if (e.contains("loss_std")) entry.stddev = e.at("loss_std").get<double>();
      if (!bench.entries.emplace(std::move(actions), entry).second)
        throw ConfigError(where, "duplicate architecture");
    }
  }
  return bench;
}

json tabular_to_json(const TabularBenchmark& bench) {
  json entries = json::array();
  for (const auto& [actions, entry] : bench.entries) {
    json e{{"actions", actions}, {"loss_mean", entry.mean}};
    if (entry.stddev) e["loss_std"] = *entry.stddev;
    entries.push_back(std::move(e));
  }
  return json{{"num_agents", bench.topology.num_agents},
              {"num_actions", bench.topology.num_actions},
              {"entries", std::move(entries)}};
}

TabularBenchmark load_tabular_benchmark(const std::filesystem::path& path) {
  return tabular_from_json(read_json(path));
}

void save_tabular_benchmark(const std::filesystem::path& path, const TabularBenchmark& bench) {
  write_json(path, tabular_to_json(bench));
}

}  // namespace manas
