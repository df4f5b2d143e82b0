#include "manas/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include "manas/random.hpp"

namespace manas {

namespace {

void check_loss(double loss, bool enforce_unit) {
  if (!std::isfinite(loss)) throw InputError("environment returned a non-finite loss");
  if (enforce_unit && (loss < 0.0 || loss > 1.0))
    throw InputError("loss " + std::to_string(loss) + " outside [0,1] with unit-loss checking on");
}

bool snapshot_due(std::int64_t round, std::int64_t interval) {
  return interval > 0 && (round - 1) % interval == 0;
}

void take_snapshot(LossTrace& trace, std::int64_t round, const std::vector<AgentScores>& scores) {
  PolicySnapshot snap;
  snap.round = round;
  snap.scores.reserve(scores.size());
  for (const auto& s : scores) snap.scores.push_back(s.b);
  trace.snapshots.push_back(std::move(snap));
}

}  // namespace

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kManas: return "manas";
    case Algorithm::kManasLs: return "manas_ls";
    case Algorithm::kRandomSearch: return "random_search";
  }
  throw Error("unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "manas") return Algorithm::kManas;
  if (name == "manas_ls") return Algorithm::kManasLs;
  if (name == "random_search") return Algorithm::kRandomSearch;
  throw ConfigError("algorithm", "unknown algorithm '" + name + "'");
}

RunResult run_manas(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed) {
  const Topology& topo = cfg.topology;
  const int n = topo.num_agents;
  const ManasHyperparams hp = cfg.resolved_manas_params();

  RunResult result;
  std::mt19937_64 rng(seed);
  std::vector<AgentScores> scores(n, AgentScores::zeros(topo.num_actions));

  JointAction joint;
  joint.actions.resize(n);
  std::vector<double> probs(n);

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    if (snapshot_due(t, cfg.snapshot_interval)) take_snapshot(result.trace, t, scores);
    for (int i = 0; i < n; ++i) {
      SamplingDistribution dist = softmax_distribution(scores[i], hp);
      joint.actions[i] = sample_index(dist.p, rng);
      probs[i] = dist.p[joint.actions[i]];
    }
    double loss;
    try {
      loss = env.sample_loss(joint, t, rng);
      check_loss(loss, cfg.enforce_unit_loss);
    } catch (const std::exception& e) {
      result.error = e.what();
      result.final_scores = std::move(scores);
      return result;
    }
    for (int i = 0; i < n; ++i) exp3_update(scores[i], joint.actions[i], loss, probs[i]);
    result.trace.rounds.push_back(TraceRound{joint, loss, probs});
  }

  result.recommendation.actions.resize(n);
  for (int i = 0; i < n; ++i) {
    SamplingDistribution dist = softmax_distribution(scores[i], hp);
    result.recommendation.actions[i] = recommend(scores[i], cfg.recommend_mode, dist, &rng);
  }
  result.final_scores = std::move(scores);
  return result;
}

RunResult run_manas_ls(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed) {
  const Topology& topo = cfg.topology;
  const int n = topo.num_agents;
  const int k = topo.num_actions;
  const std::int64_t solve_period = cfg.ls.resolved_solve_period(topo);
  const std::int64_t min_samples = cfg.ls.resolved_min_samples(topo);
  const std::int64_t window = cfg.ls.resolved_window(topo);

  RunResult result;
  std::mt19937_64 rng(seed);
  std::vector<AgentScores> scores(n, AgentScores::zeros(k));

  // The all-zero start leaves every ranking tied; break ties once per run
  // with seeded random orders so the pre-fit policies are not biased toward
  // low action indices.
  std::vector<std::vector<int>> tie_orders;
  tie_orders.reserve(n);
  for (int i = 0; i < n; ++i) tie_orders.push_back(random_permutation(k, rng));

  std::deque<std::pair<ArchitectureVector, double>> batch_window;
  std::int64_t rounds_since_solve = 0;

  JointAction joint;
  joint.actions.resize(n);
  std::vector<double> probs(n);

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    if (snapshot_due(t, cfg.snapshot_interval)) take_snapshot(result.trace, t, scores);
    for (int i = 0; i < n; ++i) {
      SamplingDistribution dist = zipf_distribution(scores[i], tie_orders[i]);
      joint.actions[i] = sample_index(dist.p, rng);
      probs[i] = dist.p[joint.actions[i]];
    }
    double loss;
    try {
      loss = env.sample_loss(joint, t, rng);
      check_loss(loss, cfg.enforce_unit_loss);
    } catch (const std::exception& e) {
      result.error = e.what();
      result.final_scores = std::move(scores);
      return result;
    }
    batch_window.emplace_back(encode(joint, topo), loss);
    if (!cfg.ls.full_history)
      while (static_cast<std::int64_t>(batch_window.size()) > window) batch_window.pop_front();
    result.trace.rounds.push_back(TraceRound{joint, loss, probs});

    if (++rounds_since_solve >= solve_period &&
        static_cast<std::int64_t>(batch_window.size()) >= min_samples) {
      LsBatch batch(topo);
      for (const auto& [z, l] : batch_window) batch.add(z, l);
      std::vector<double> beta = ls_batch_solve(batch);
      for (int i = 0; i < n; ++i)
        std::copy(beta.begin() + static_cast<std::ptrdiff_t>(i) * k,
                  beta.begin() + static_cast<std::ptrdiff_t>(i + 1) * k, scores[i].b.begin());
      rounds_since_solve = 0;
    }
  }

  result.recommendation.actions.resize(n);
  for (int i = 0; i < n; ++i) {
    SamplingDistribution dist = zipf_distribution(scores[i], tie_orders[i]);
    result.recommendation.actions[i] = recommend(scores[i], cfg.recommend_mode, dist, &rng);
  }
  result.final_scores = std::move(scores);
  return result;
}

RunResult run_random_search(const ExperimentConfig& cfg, const Environment& env,
                            std::uint64_t seed) {
  const Topology& topo = cfg.topology;
  const int n = topo.num_agents;
  const double uniform_p = 1.0 / topo.num_actions;
  const std::vector<double> uniform(topo.num_actions, uniform_p);

  RunResult result;
  std::mt19937_64 rng(seed);
  JointAction joint;
  joint.actions.resize(n);
  std::vector<double> probs(n, uniform_p);

  double best_loss = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    for (int i = 0; i < n; ++i) joint.actions[i] = sample_index(uniform, rng);
    double loss;
    try {
      loss = env.sample_loss(joint, t, rng);
      check_loss(loss, cfg.enforce_unit_loss);
    } catch (const std::exception& e) {
      result.error = e.what();
      return result;
    }
    result.trace.rounds.push_back(TraceRound{joint, loss, probs});
    if (loss < best_loss) {  // strict: earliest round wins ties
      best_loss = loss;
      result.recommendation = joint;
    }
  }
  return result;
}

RunResult run_single(const ExperimentConfig& cfg, const Environment& env, std::uint64_t seed) {
  if (env.topology() != cfg.topology)
    throw ConfigError("topology", "environment topology does not match the experiment config");
  if (cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  switch (cfg.algorithm) {
    case Algorithm::kManas: return run_manas(cfg, env, seed);
    case Algorithm::kManasLs: return run_manas_ls(cfg, env, seed);
    case Algorithm::kRandomSearch: return run_random_search(cfg, env, seed);
  }
  throw Error("unknown algorithm");
}

int RepeatsReport::completed_runs() const {
  int done = 0;
  for (const auto& o : outcomes)
    if (o.run.ok()) ++done;
  return done;
}

RepeatsReport run_repeats(const ExperimentConfig& cfg, const Environment& env, int threads,
                          const ReportOptions& report_opts) {
  if (cfg.repeats < 1) throw ConfigError("repeats", "must be >= 1");
  RepeatsReport report;
  report.outcomes.resize(cfg.repeats);

  auto work = [&](int r) {
    RepeatOutcome& out = report.outcomes[r];
    out.seed = cfg.seed + static_cast<std::uint64_t>(r);
    out.run = run_single(cfg, env, out.seed);
    if (!out.run.ok()) return;
    out.report = build_report(out.run.trace, env, out.run.recommendation, report_opts);
    if (env.replayable() && !out.run.recommendation.actions.empty()) {
      double total = 0.0;
      if (env.stationary()) {
        total = static_cast<double>(cfg.horizon) * env.mean_loss(out.run.recommendation, 1);
      } else {
        for (std::int64_t t = 1; t <= cfg.horizon; ++t)
          total += env.mean_loss(out.run.recommendation, t);
      }
      out.recommendation_loss = total / static_cast<double>(cfg.horizon);
    }
  };

  const int workers = std::max(1, std::min(threads, cfg.repeats));
  if (workers == 1) {
    for (int r = 0; r < cfg.repeats; ++r) work(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (int r = next.fetch_add(1); r < cfg.repeats; r = next.fetch_add(1)) work(r);
      });
    for (auto& th : pool) th.join();
  }

  // Aggregate curves over completed runs.
  std::vector<const RegretReport*> done;
  for (auto& o : report.outcomes) {
    if (o.run.ok() && o.report) {
      done.push_back(&*o.report);
    } else {
      report.warnings.push_back("run with seed " + std::to_string(o.seed) +
                                " failed: " + o.run.error);
    }
  }
  if (!done.empty()) {
    const std::size_t horizon = done.front()->per_round.size();
    report.mean_per_round.assign(horizon, 0.0);
    report.std_per_round.assign(horizon, 0.0);
    report.mean_cumulative.assign(horizon, 0.0);
    report.std_cumulative.assign(horizon, 0.0);
    const double count = static_cast<double>(done.size());
    std::vector<double> cum(done.size(), 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      double mean_i = 0.0, mean_c = 0.0;
      for (std::size_t r = 0; r < done.size(); ++r) {
        cum[r] += done[r]->per_round[t];
        mean_i += done[r]->per_round[t];
        mean_c += cum[r];
      }
      mean_i /= count;
      mean_c /= count;
      double var_i = 0.0, var_c = 0.0;
      for (std::size_t r = 0; r < done.size(); ++r) {
        var_i += (done[r]->per_round[t] - mean_i) * (done[r]->per_round[t] - mean_i);
        var_c += (cum[r] - mean_c) * (cum[r] - mean_c);
      }
      report.mean_per_round[t] = mean_i;
      report.mean_cumulative[t] = mean_c;
      if (done.size() > 1) {
        report.std_per_round[t] = std::sqrt(var_i / (count - 1.0));
        report.std_cumulative[t] = std::sqrt(var_c / (count - 1.0));
      }
    }
  }

  for (std::size_t r = 0; r < report.outcomes.size(); ++r) {
    const auto& o = report.outcomes[r];
    if (!o.run.ok() || !o.recommendation_loss) continue;
    if (report.best_run < 0 ||
        *o.recommendation_loss < *report.outcomes[report.best_run].recommendation_loss)
      report.best_run = static_cast<int>(r);
  }
  return report;
}

}  // namespace manas
