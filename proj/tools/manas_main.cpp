#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manas/config.hpp"
#include "manas/figures.hpp"
#include "manas/io.hpp"
#include "manas/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  bool quiet = false;
  int threads = 1;
};

json load_config_with_overrides(const CommonFlags& flags) {
  json doc = manas::read_json(flags.config_path);
  for (const std::string& assignment : flags.overrides) manas::apply_override(doc, assignment);
  return doc;
}

// Per-run artifacts; `flat` controls whether they land in dir/ directly.
void write_run_artifacts(const fs::path& dir, const manas::RunResult& run,
                         const manas::RegretReport& report, const std::vector<double>& bound) {
  manas::write_trace_csv(dir / "trace.csv", run.trace);
  manas::write_regret_csv(dir / "regret.csv", run.trace, report, bound);
  manas::write_json(dir / "report.json", manas::run_report_json(run, report));
}

int cmd_run(const CommonFlags& flags) {
  json doc = load_config_with_overrides(flags);
  manas::Experiment exp =
      manas::parse_experiment(doc, fs::path(flags.config_path).parent_path());
  auto env = manas::build_environment(exp);

  fs::create_directories(flags.out_dir);
  manas::write_json(fs::path(flags.out_dir) / "resolved-config.json",
                    manas::experiment_to_json(exp));

  manas::RepeatsReport repeats = manas::run_repeats(exp.config, *env, flags.threads);
  std::vector<double> bound = manas::exp3_bound_curve(exp.config.topology, exp.config.horizon);

  for (const std::string& warning : repeats.warnings) std::cerr << "warning: " << warning << "\n";

  if (exp.config.repeats == 1) {
    const auto& outcome = repeats.outcomes.front();
    if (!outcome.run.ok()) {
      std::cerr << "error: run failed: " << outcome.run.error << "\n";
      return 1;
    }
    write_run_artifacts(flags.out_dir, outcome.run, *outcome.report, bound);
    if (!flags.quiet) {
      std::cout << "cumulative regret " << outcome.report->cumulative_regret;
      if (outcome.report->simple_regret)
        std::cout << ", simple regret " << *outcome.report->simple_regret;
      std::cout << "\n";
    }
    return 0;
  }

  json aggregate;
  aggregate["runs"] = json::array();
  for (std::size_t r = 0; r < repeats.outcomes.size(); ++r) {
    const auto& outcome = repeats.outcomes[r];
    json run_json;
    run_json["seed"] = outcome.seed;
    if (outcome.run.ok()) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%02zu", r);
      fs::path run_dir = fs::path(flags.out_dir) / name;
      write_run_artifacts(run_dir, outcome.run, *outcome.report, bound);
      run_json["dir"] = name;
      run_json["cumulative_regret"] = outcome.report->cumulative_regret;
      if (outcome.report->simple_regret) run_json["simple_regret"] = *outcome.report->simple_regret;
      if (outcome.recommendation_loss)
        run_json["recommendation_loss"] = *outcome.recommendation_loss;
    } else {
      run_json["error"] = outcome.run.error;
    }
    aggregate["runs"].push_back(std::move(run_json));
  }
  aggregate["best_run"] = repeats.best_run;
  aggregate["warnings"] = repeats.warnings;
  manas::write_json(fs::path(flags.out_dir) / "report.json", aggregate);
  manas::write_curve_csv(fs::path(flags.out_dir) / "regret_mean.csv", repeats.mean_cumulative,
                         repeats.std_cumulative);
  if (repeats.completed_runs() == 0) {
    std::cerr << "error: every run failed\n";
    return 1;
  }
  if (!flags.quiet)
    std::cout << repeats.completed_runs() << "/" << repeats.outcomes.size()
              << " runs completed, mean final cumulative regret "
              << repeats.mean_cumulative.back() << "\n";
  return 0;
}

int cmd_validate(const CommonFlags& flags) {
  json doc = load_config_with_overrides(flags);
  manas::Experiment exp =
      manas::parse_experiment(doc, fs::path(flags.config_path).parent_path());
  // Also touches the benchmark file / schedule so path errors surface here.
  manas::build_environment(exp);
  std::cout << "OK " << flags.config_path << "\n";
  return 0;
}

int cmd_gsd(const manas::GsdFigureOptions& opts, const std::string& out_dir, bool quiet) {
  manas::GsdFigureData data = manas::run_gsd_figure(opts);
  manas::write_gsd_figure(data, out_dir);
  if (!quiet) {
    for (const auto& [name, rep] : data.results)
      std::cout << name << ": final mean cumulative regret "
                << (rep.mean_cumulative.empty() ? 0.0 : rep.mean_cumulative.back()) << "\n";
  }
  return 0;
}

struct GenTabularFlags {
  int num_agents = 2;
  int num_actions = 2;
  std::string generator = "random-uniform";
  double gap = 0.2;
  double noise_std = -1.0;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  std::string out;
};

int cmd_gen_tabular(const GenTabularFlags& flags) {
  manas::Topology topo(flags.num_agents, flags.num_actions);
  auto space = topo.joint_space_size();
  const bool exhaustive = space && *space <= 1000000;
  if (!exhaustive && flags.samples <= 0)
    throw manas::SizeGuardError("K^N exceeds 10^6; pass --samples for sampled generation");

  std::mt19937_64 rng(flags.seed);
  manas::TabularBenchmark bench;
  bench.topology = topo;

  auto random_action = [&]() {
    std::vector<int> actions(topo.num_agents);
    std::vector<double> uniform(topo.num_actions, 1.0 / topo.num_actions);
    for (int i = 0; i < topo.num_agents; ++i) actions[i] = manas::sample_index(uniform, rng);
    return actions;
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (exhaustive) {
    std::vector<int> actions(topo.num_agents, 0);
    while (true) {
      bench.entries[actions] = manas::TabularEntry{unit(rng), std::nullopt};
      int i = topo.num_agents - 1;
      for (; i >= 0; --i) {
        if (++actions[i] < topo.num_actions) break;
        actions[i] = 0;
      }
      if (i < 0) break;
    }
  } else {
    while (static_cast<std::int64_t>(bench.entries.size()) < flags.samples)
      bench.entries[random_action()] = manas::TabularEntry{unit(rng), std::nullopt};
  }

  if (flags.generator == "planted-optimum") {
    if (!(flags.gap > 0.0)) throw manas::ConfigError("gap", "must be > 0");
    // Squeeze every loss into [gap + 0.1, 1], then plant a unique optimum.
    for (auto& [actions, entry] : bench.entries)
      entry.mean = flags.gap + 0.1 + (1.0 - flags.gap - 0.1) * unit(rng);
    auto it = bench.entries.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(
                         std::uniform_int_distribution<std::size_t>(
                             0, bench.entries.size() - 1)(rng)));
    it->second.mean = 0.1;
  } else if (flags.generator != "random-uniform") {
    throw manas::ConfigError("generator", "must be random-uniform or planted-optimum");
  }

  if (flags.noise_std >= 0.0)
    for (auto& [actions, entry] : bench.entries) entry.stddev = flags.noise_std;

  manas::save_tabular_benchmark(flags.out, bench);
  std::cout << "wrote " << bench.entries.size() << " entries to " << flags.out << "\n";
  return 0;
}

struct SweepFlags {
  CommonFlags common;
  std::string param;
  std::vector<std::string> values;
};

int cmd_sweep(const SweepFlags& flags) {
  json summary = json::array();
  for (const std::string& value : flags.values) {
    CommonFlags run_flags = flags.common;
    run_flags.overrides.push_back(flags.param + "=" + value);
    std::string label = flags.param + "=" + value;
    for (char& c : label)
      if (c == '/' || c == ' ') c = '_';
    run_flags.out_dir = (fs::path(flags.common.out_dir) / label).string();
    int rc = cmd_run(run_flags);
    json row;
    row["value"] = value;
    row["dir"] = label;
    row["exit"] = rc;
    if (rc == 0) {
      json report = manas::read_json(fs::path(run_flags.out_dir) / "report.json");
      if (report.contains("regret"))
        row["cumulative_regret"] = report["regret"]["cumulative_regret"];
      else if (report.contains("runs"))
        row["runs"] = report["runs"].size();
    }
    summary.push_back(std::move(row));
  }
  manas::write_json(fs::path(flags.common.out_dir) / "sweep.json", summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent adversarial-bandit architecture search simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", run_flags.config_path, "config file")->required();
  run->add_option("--set", run_flags.overrides, "override key.path=value (repeatable)");
  run->add_option("--out", run_flags.out_dir, "output directory");
  run->add_option("--threads", run_flags.threads, "worker threads for repeats");
  run->add_flag("--quiet", run_flags.quiet, "suppress progress output");
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_repeats_n;
  run->add_option("--seed", run_seed, "override the seed");
  run->add_option("--repeats", run_repeats_n, "override the repeat count");

  CommonFlags validate_flags;
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate a config");
  validate->add_option("--config", validate_flags.config_path, "config file")->required();
  validate->add_option("--set", validate_flags.overrides, "override key.path=value");

  manas::GsdFigureOptions gsd_opts;
  std::string gsd_out = "gsd_out";
  bool gsd_quiet = false;
  CLI::App* gsd = app.add_subcommand("gsd", "Gaussian-squeeze figure data for all algorithms");
  gsd->add_option("--out", gsd_out, "output directory");
  gsd->add_option("--agents", gsd_opts.num_agents, "number of agents");
  gsd->add_option("--actions", gsd_opts.num_actions, "actions per agent");
  gsd->add_option("--mu", gsd_opts.mu, "squeeze target");
  gsd->add_option("--sigma", gsd_opts.sigma, "squeeze width");
  gsd->add_option("--horizon", gsd_opts.horizon, "rounds per run");
  gsd->add_option("--repeats", gsd_opts.repeats, "seeded repeats per algorithm");
  gsd->add_option("--seed", gsd_opts.seed, "base seed");
  gsd->add_option("--scale", gsd_opts.contribution_scale, "contribution per action index");
  gsd->add_option("--eta", gsd_opts.eta, "softmax temperature");
  gsd->add_option("--gamma", gsd_opts.gamma, "uniform exploration mixture");
  gsd->add_option("--threads", gsd_opts.threads, "worker threads");
  gsd->add_flag("--quiet", gsd_quiet, "suppress progress output");

  GenTabularFlags gen_flags;
  CLI::App* gen = app.add_subcommand("gen-tabular", "Generate a tabular benchmark file");
  gen->add_option("--agents", gen_flags.num_agents, "number of agents")->required();
  gen->add_option("--actions", gen_flags.num_actions, "actions per agent")->required();
  gen->add_option("--generator", gen_flags.generator, "random-uniform | planted-optimum");
  gen->add_option("--gap", gen_flags.gap, "planted optimality gap");
  gen->add_option("--noise-std", gen_flags.noise_std, "attach loss_std to every entry");
  gen->add_option("--seed", gen_flags.seed, "generator seed");
  gen->add_option("--samples", gen_flags.samples, "sampled entries when K^N > 10^6");
  gen->add_option("--out", gen_flags.out, "output file")->required();

  SweepFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a config across override values");
  sweep->add_option("--config", sweep_flags.common.config_path, "config file")->required();
  sweep->add_option("--param", sweep_flags.param, "config key to sweep")->required();
  sweep->add_option("--values", sweep_flags.values, "values to sweep over")->required();
  sweep->add_option("--set", sweep_flags.common.overrides, "fixed overrides");
  sweep->add_option("--out", sweep_flags.common.out_dir, "output directory");
  sweep->add_option("--threads", sweep_flags.common.threads, "worker threads");
  sweep->add_flag("--quiet", sweep_flags.common.quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run_seed) run_flags.overrides.push_back("seed=" + std::to_string(*run_seed));
      if (run_repeats_n)
        run_flags.overrides.push_back("repeats=" + std::to_string(*run_repeats_n));
      return cmd_run(run_flags);
    }
    if (validate->parsed()) return cmd_validate(validate_flags);
    if (gsd->parsed()) return cmd_gsd(gsd_opts, gsd_out, gsd_quiet);
    if (gen->parsed()) return cmd_gen_tabular(gen_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
  } catch (const manas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
