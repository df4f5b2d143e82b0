#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "manas/config.hpp"
#include "manas/runner.hpp"

namespace manas {

// The squeeze reproduction run by `gsd`: all three algorithms on one
// Gaussian-squeeze instance, aggregated over seeded repeats.
//
// contribution_scale, eta and gamma are the shipped defaults for this
// experiment (action k contributes k*scale). The closed-form hyperparameter
// formulas target horizons far beyond 5000 rounds and move the softmax too
// little to show learning here, so the experiment defaults are tuned the way
// the formulas' source intends; everything is overridable on the CLI.
struct GsdFigureOptions {
  int num_agents = 100;
  int num_actions = 10;
  double mu = 1.0;
  double sigma = 10.0;
  std::int64_t horizon = 5000;
  int repeats = 8;
  std::uint64_t seed = 1;
  double contribution_scale = 0.04;
  double eta = 0.1;
  double gamma = 0.02;
  int threads = 1;
};

struct GsdFigureData {
  GsdFigureOptions options;
  // Keyed by algorithm name: manas, manas_ls, random_search.
  std::map<std::string, RepeatsReport> results;
  std::vector<double> bound;  // 2N*sqrt(t*K*lnK)
};

Experiment gsd_experiment(const GsdFigureOptions& opts, Algorithm algo);
GsdFigureData run_gsd_figure(const GsdFigureOptions& opts);

// Writes manas.csv, manas_ls.csv, random.csv (cumulative mean/std), the
// *_per_round.csv running averages, bound.csv and summary.json.
void write_gsd_figure(const GsdFigureData& data, const std::filesystem::path& out_dir);

}  // namespace manas
