#include "manas/figures.hpp"

#include <nlohmann/json.hpp>

#include "manas/io.hpp"

namespace manas {

namespace {

const Algorithm kAll[] = {Algorithm::kManas, Algorithm::kManasLs, Algorithm::kRandomSearch};

std::string csv_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kManas: return "manas.csv";
    case Algorithm::kManasLs: return "manas_ls.csv";
    case Algorithm::kRandomSearch: return "random.csv";
  }
  throw Error("unknown algorithm");
}

}  // namespace

Experiment gsd_experiment(const GsdFigureOptions& opts, Algorithm algo) {
  Experiment exp;
  exp.config.topology = Topology(opts.num_agents, opts.num_actions);
  exp.config.algorithm = algo;
  exp.config.horizon = opts.horizon;
  exp.config.seed = opts.seed;
  exp.config.repeats = opts.repeats;
  exp.config.recommend_mode = RecommendMode::kArgmin;
  if (algo == Algorithm::kManas) {
    ManasHyperparams hp;
    hp.eta = opts.eta;
    hp.gamma = opts.gamma;
    hp.horizon_n = opts.horizon;
    hp.degenerate = opts.num_actions < 2;
    exp.config.manas_params = hp;
  }
  GsdConfig gsd;
  gsd.mu = opts.mu;
  gsd.sigma = opts.sigma;
  gsd.contributions.resize(opts.num_actions);
  for (int k = 0; k < opts.num_actions; ++k)
    gsd.contributions[k] = opts.contribution_scale * k;
  exp.environment = gsd;
  return exp;
}

GsdFigureData run_gsd_figure(const GsdFigureOptions& opts) {
  GsdFigureData data;
  data.options = opts;
  for (Algorithm algo : kAll) {
    Experiment exp = gsd_experiment(opts, algo);
    auto env = build_environment(exp);
    data.results.emplace(algorithm_name(algo), run_repeats(exp.config, *env, opts.threads));
  }
  data.bound = exp3_bound_curve(Topology(opts.num_agents, opts.num_actions), opts.horizon);
  return data;
}

void write_gsd_figure(const GsdFigureData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (Algorithm algo : kAll) {
    const RepeatsReport& rep = data.results.at(algorithm_name(algo));
    write_curve_csv(out_dir / csv_name(algo), rep.mean_cumulative, rep.std_cumulative);

    // Running average regret (cumulative / t) alongside the cumulative form.
    std::vector<double> avg(rep.mean_cumulative.size());
    std::vector<double> avg_std(rep.std_cumulative.size());
    for (std::size_t t = 0; t < avg.size(); ++t) {
      avg[t] = rep.mean_cumulative[t] / static_cast<double>(t + 1);
      avg_std[t] = rep.std_cumulative[t] / static_cast<double>(t + 1);
    }
    std::string stem = csv_name(algo);
    stem.erase(stem.size() - 4);
    write_curve_csv(out_dir / (stem + "_per_round.csv"), avg, avg_std);
  }
  write_bound_csv(out_dir / "bound.csv", data.bound);

  nlohmann::json summary;
  summary["num_agents"] = data.options.num_agents;
  summary["num_actions"] = data.options.num_actions;
  summary["mu"] = data.options.mu;
  summary["sigma"] = data.options.sigma;
  summary["horizon"] = data.options.horizon;
  summary["repeats"] = data.options.repeats;
  summary["seed"] = data.options.seed;
  summary["contribution_scale"] = data.options.contribution_scale;
  summary["eta"] = data.options.eta;
  summary["gamma"] = data.options.gamma;
  for (const auto& [name, rep] : data.results) {
    nlohmann::json r;
    r["final_cumulative_regret_mean"] =
        rep.mean_cumulative.empty() ? 0.0 : rep.mean_cumulative.back();
    r["completed_runs"] = rep.completed_runs();
    r["best_run"] = rep.best_run;
    if (rep.best_run >= 0 && rep.outcomes[rep.best_run].recommendation_loss)
      r["best_recommendation_loss"] = *rep.outcomes[rep.best_run].recommendation_loss;
    summary[name] = std::move(r);
  }
  write_json(out_dir / "summary.json", summary);
}

}  // namespace manas
