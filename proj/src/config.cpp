#include "manas/config.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "manas/io.hpp"

namespace manas {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
T get_field(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where.empty() ? key : where + "." + key, "wrong type");
  }
}

template <typename T>
T get_field_or(const json& j, const std::string& where, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where.empty() ? key : where + "." + key, "wrong type");
  }
}

Topology parse_topology(const json& j) {
  reject_unknown(j, {"num_agents", "num_actions", "cells"}, "topology");
  int actions = get_field<int>(j, "topology", "num_actions");
  if (j.contains("cells")) {
    if (j.contains("num_agents"))
      throw ConfigError("topology", "give either num_agents or cells, not both");
    return Topology::from_cells(get_field<int>(j, "topology", "cells"), actions);
  }
  return Topology(get_field<int>(j, "topology", "num_agents"), actions);
}

LinearEnvConfig parse_linear(const json& j, const Topology& topo) {
  reject_unknown(j, {"noise_std", "beta_schedule"}, "environment.linear");
  LinearEnvConfig cfg;
  cfg.noise_std = get_field_or<double>(j, "environment.linear", "noise_std", 0.0);
  if (!j.contains("beta_schedule"))
    throw ConfigError("environment.linear.beta_schedule", "missing");
  const json& sched = j.at("beta_schedule");
  const std::string where = "environment.linear.beta_schedule";
  std::string kind = get_field<std::string>(sched, where, "kind");
  const std::size_t dim = static_cast<std::size_t>(topo.flat_size());
  auto check_len = [&](const std::vector<double>& beta, const std::string& field) {
    if (beta.size() != dim)
      throw ConfigError(field, "must have K*N = " + std::to_string(dim) + " entries");
  };
  if (kind == "stationary") {
    reject_unknown(sched, {"kind", "beta"}, where);
    cfg.kind = LinearEnvConfig::Kind::kStationary;
    cfg.beta = get_field<std::vector<double>>(sched, where, "beta");
    check_len(cfg.beta, where + ".beta");
  } else if (kind == "piecewise") {
    reject_unknown(sched, {"kind", "segments"}, where);
    cfg.kind = LinearEnvConfig::Kind::kPiecewise;
    if (!sched.contains("segments") || !sched.at("segments").is_array())
      throw ConfigError(where + ".segments", "missing or not an array");
    for (std::size_t i = 0; i < sched.at("segments").size(); ++i) {
      const json& seg = sched.at("segments")[i];
      const std::string seg_where = where + ".segments[" + std::to_string(i) + "]";
      reject_unknown(seg, {"start_round", "beta"}, seg_where);
      BetaSegment out;
      out.start_round = get_field<std::int64_t>(seg, seg_where, "start_round");
      out.beta = get_field<std::vector<double>>(seg, seg_where, "beta");
      check_len(out.beta, seg_where + ".beta");
      cfg.segments.push_back(std::move(out));
    }
  } else if (kind == "random_walk") {
    reject_unknown(sched, {"kind", "beta0", "step_size"}, where);
    cfg.kind = LinearEnvConfig::Kind::kRandomWalk;
    cfg.beta = get_field<std::vector<double>>(sched, where, "beta0");
    check_len(cfg.beta, where + ".beta0");
    cfg.step_size = get_field<double>(sched, where, "step_size");
  } else {
    throw ConfigError(where + ".kind", "must be stationary, piecewise or random_walk");
  }
  return cfg;
}

}  // namespace

Experiment parse_experiment(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"topology", "algorithm", "horizon", "seed", "repeats", "recommend_mode",
                  "manas", "manas_ls", "environment", "snapshot_interval", "enforce_unit_loss"},
                 "");
  Experiment exp;
  if (!j.contains("topology")) throw ConfigError("topology", "missing");
  exp.config.topology = parse_topology(j.at("topology"));
  exp.config.algorithm = algorithm_from_name(get_field<std::string>(j, "", "algorithm"));
  exp.config.horizon = get_field<std::int64_t>(j, "", "horizon");
  if (exp.config.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  exp.config.seed = get_field_or<std::uint64_t>(j, "", "seed", 0);
  exp.config.repeats = get_field_or<int>(j, "", "repeats", 1);
  if (exp.config.repeats < 1) throw ConfigError("repeats", "must be >= 1");
  std::string mode = get_field_or<std::string>(j, "", "recommend_mode", "argmin");
  if (mode == "argmin") {
    exp.config.recommend_mode = RecommendMode::kArgmin;
  } else if (mode == "sample") {
    exp.config.recommend_mode = RecommendMode::kSample;
  } else {
    throw ConfigError("recommend_mode", "must be argmin or sample");
  }
  exp.config.snapshot_interval = get_field_or<std::int64_t>(j, "", "snapshot_interval", 0);
  if (exp.config.snapshot_interval < 0) throw ConfigError("snapshot_interval", "must be >= 0");
  exp.config.enforce_unit_loss = get_field_or<bool>(j, "", "enforce_unit_loss", false);

  if (j.contains("manas")) {
    const json& m = j.at("manas");
    reject_unknown(m, {"eta", "gamma"}, "manas");
    ManasHyperparams hp = manas_defaults(exp.config.topology, exp.config.horizon);
    hp.eta = get_field_or<double>(m, "manas", "eta", hp.eta);
    hp.gamma = get_field_or<double>(m, "manas", "gamma", hp.gamma);
    if (!(hp.eta >= 0.0)) throw ConfigError("manas.eta", "must be >= 0");
    if (hp.gamma < 0.0 || hp.gamma > 1.0) throw ConfigError("manas.gamma", "must be in [0,1]");
    exp.config.manas_params = hp;
  }
  if (j.contains("manas_ls")) {
    const json& m = j.at("manas_ls");
    reject_unknown(m, {"solve_period", "min_samples", "window", "full_history"}, "manas_ls");
    exp.config.ls.solve_period = get_field_or<std::int64_t>(m, "manas_ls", "solve_period", 0);
    exp.config.ls.min_samples = get_field_or<std::int64_t>(m, "manas_ls", "min_samples", 0);
    exp.config.ls.window = get_field_or<std::int64_t>(m, "manas_ls", "window", 0);
    exp.config.ls.full_history = get_field_or<bool>(m, "manas_ls", "full_history", false);
    for (auto [v, name] : {std::pair<std::int64_t, const char*>{exp.config.ls.solve_period, "solve_period"},
                           {exp.config.ls.min_samples, "min_samples"},
                           {exp.config.ls.window, "window"}})
      if (v < 0) throw ConfigError(std::string("manas_ls.") + name, "must be >= 0");
  }

  if (!j.contains("environment")) throw ConfigError("environment", "missing");
  const json& env = j.at("environment");
  reject_unknown(env, {"kind", "gsd", "linear", "tabular"}, "environment");
  std::string kind = get_field<std::string>(env, "environment", "kind");
  if (kind == "gsd") {
    if (!env.contains("gsd")) throw ConfigError("environment.gsd", "missing");
    const json& g = env.at("gsd");
    reject_unknown(g, {"mu", "sigma", "contributions"}, "environment.gsd");
    GsdConfig cfg;
    cfg.mu = get_field_or<double>(g, "environment.gsd", "mu", 1.0);
    cfg.sigma = get_field_or<double>(g, "environment.gsd", "sigma", 10.0);
    if (!(cfg.sigma > 0.0)) throw ConfigError("environment.gsd.sigma", "must be > 0");
    cfg.contributions =
        get_field_or<std::vector<double>>(g, "environment.gsd", "contributions", {});
    if (!cfg.contributions.empty() &&
        static_cast<int>(cfg.contributions.size()) != exp.config.topology.num_actions)
      throw ConfigError("environment.gsd.contributions", "must have one entry per action");
    exp.environment = cfg;
  } else if (kind == "linear") {
    if (!env.contains("linear")) throw ConfigError("environment.linear", "missing");
    exp.environment = parse_linear(env.at("linear"), exp.config.topology);
  } else if (kind == "tabular") {
    if (!env.contains("tabular")) throw ConfigError("environment.tabular", "missing");
    const json& t = env.at("tabular");
    reject_unknown(t, {"path", "noisy"}, "environment.tabular");
    TabularSpec spec;
    spec.path = get_field<std::string>(t, "environment.tabular", "path");
    if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
    spec.noisy = get_field_or<bool>(t, "environment.tabular", "noisy", false);
    exp.environment = spec;
  } else {
    throw ConfigError("environment.kind", "must be gsd, linear or tabular");
  }
  return exp;
}

Experiment load_experiment(const std::filesystem::path& config_path) {
  return parse_experiment(read_json(config_path), config_path.parent_path());
}

std::unique_ptr<Environment> build_environment(const Experiment& exp) {
  const Topology& topo = exp.config.topology;
  if (const auto* gsd = std::get_if<GsdConfig>(&exp.environment))
    return std::make_unique<GsdEnvironment>(*gsd, topo);
  if (const auto* linear = std::get_if<LinearEnvConfig>(&exp.environment))
    return std::make_unique<LinearEnvironment>(*linear, topo, exp.config.horizon,
                                               exp.config.seed);
  const auto& spec = std::get<TabularSpec>(exp.environment);
  TabularBenchmark bench = load_tabular_benchmark(spec.path);
  if (!(bench.topology == topo))
    throw ConfigError("environment.tabular.path",
                      "benchmark topology does not match the experiment topology");
  return std::make_unique<TabularEnvironment>(std::move(bench), spec.noisy);
}

json experiment_to_json(const Experiment& exp) {
  const ExperimentConfig& cfg = exp.config;
  json j;
  j["topology"] = {{"num_agents", cfg.topology.num_agents},
                   {"num_actions", cfg.topology.num_actions}};
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  j["recommend_mode"] = cfg.recommend_mode == RecommendMode::kArgmin ? "argmin" : "sample";
  j["snapshot_interval"] = cfg.snapshot_interval;
  j["enforce_unit_loss"] = cfg.enforce_unit_loss;
  ManasHyperparams hp = cfg.resolved_manas_params();
  j["manas"] = {{"eta", hp.eta}, {"gamma", hp.gamma}};
  j["manas_ls"] = {{"solve_period", cfg.ls.resolved_solve_period(cfg.topology)},
                   {"min_samples", cfg.ls.resolved_min_samples(cfg.topology)},
                   {"window", cfg.ls.resolved_window(cfg.topology)},
                   {"full_history", cfg.ls.full_history}};
  if (const auto* gsd = std::get_if<GsdConfig>(&exp.environment)) {
    std::vector<double> contributions = gsd->contributions;
    if (contributions.empty()) {
      contributions.resize(cfg.topology.num_actions);
      for (int k = 0; k < cfg.topology.num_actions; ++k) contributions[k] = k;
    }
    j["environment"] = {{"kind", "gsd"},
                        {"gsd",
                         {{"mu", gsd->mu},
                          {"sigma", gsd->sigma},
                          {"contributions", contributions}}}};
  } else if (const auto* linear = std::get_if<LinearEnvConfig>(&exp.environment)) {
    json sched;
    switch (linear->kind) {
      case LinearEnvConfig::Kind::kStationary:
        sched = {{"kind", "stationary"}, {"beta", linear->beta}};
        break;
      case LinearEnvConfig::Kind::kPiecewise: {
        json segments = json::array();
        for (const auto& seg : linear->segments)
          segments.push_back({{"start_round", seg.start_round}, {"beta", seg.beta}});
        sched = {{"kind", "piecewise"}, {"segments", std::move(segments)}};
        break;
      }
      case LinearEnvConfig::Kind::kRandomWalk:
        sched = {{"kind", "random_walk"}, {"beta0", linear->beta},
                 {"step_size", linear->step_size}};
        break;
    }
    j["environment"] = {{"kind", "linear"},
                        {"linear",
                         {{"noise_std", linear->noise_std}, {"beta_schedule", std::move(sched)}}}};
  } else {
    const auto& spec = std::get<TabularSpec>(exp.environment);
    j["environment"] = {{"kind", "tabular"},
                        {"tabular", {{"path", spec.path.string()}, {"noisy", spec.noisy}}}};
  }
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("", "override must look like key.path=value: " + assignment);
  std::string path = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // unquoted strings are taken verbatim
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError(path, "empty key segment in override");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace manas
