#include "remsched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "remsched/csv.hpp"

namespace remsched {

namespace fs = std::filesystem;
using nlohmann::json;

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "vi") return Algorithm::vi;
  if (name == "dqn") return Algorithm::dqn;
  if (name == "se_dqn") return Algorithm::se_dqn;
  if (name == "ddpg") return Algorithm::ddpg;
  if (name == "se_ddpg") return Algorithm::se_ddpg;
  if (name == "random") return Algorithm::random_policy;
  if (name == "greedy_aoi") return Algorithm::greedy_aoi;
  throw ValidationError("unknown agent algorithm: \"" + name + "\"");
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::vi: return "vi";
    case Algorithm::dqn: return "dqn";
    case Algorithm::se_dqn: return "se_dqn";
    case Algorithm::ddpg: return "ddpg";
    case Algorithm::se_ddpg: return "se_ddpg";
    case Algorithm::random_policy: return "random";
    case Algorithm::greedy_aoi: return "greedy_aoi";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ValidationError("config field \"" + field + "\": " + why);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad_field(key, e.what());
  }
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& field) {
  if (!rows.is_array() || rows.empty()) bad_field(field, "expected a nested array of numbers");
  const size_t cols = rows[0].size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) bad_field(field, "ragged rows");
    for (size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.label = get_or<std::string>(j, "label", "system");

  if (!j.contains("system")) bad_field("system", "missing");
  const json& sys = j.at("system");
  cfg.sensors = get_or<int>(sys, "sensors", 2);
  cfg.channels = get_or<int>(sys, "channels", 1);
  if (cfg.sensors < 1) bad_field("system.sensors", "must be >= 1");
  if (cfg.channels < 1 || cfg.channels > cfg.sensors)
    bad_field("system.channels", "need 1 <= channels <= sensors");
  cfg.drop_prob = get_or<std::vector<double>>(sys, "drop_prob", cfg.drop_prob);
  cfg.tau_max = get_or<int>(sys, "tau_max", 16);
  cfg.system_seed = get_or<std::uint64_t>(sys, "seed", 1);
  // Reward lookups saturate at the table end. Defaulting the cap to tau_max
  // bounds the exponential MSE growth of unstable processes the same way the
  // truncated model does; otherwise starved sensors poison value targets.
  cfg.mse_table_len = get_or<int>(sys, "mse_table_len", cfg.tau_max);
  cfg.gen.state_dim = get_or<int>(sys, "state_dim", 2);
  cfg.gen.meas_dim = get_or<int>(sys, "meas_dim", 1);
  if (sys.contains("spectral_radius_range")) {
    const auto r = sys.at("spectral_radius_range").get<std::vector<double>>();
    if (r.size() != 2) bad_field("system.spectral_radius_range", "expected [lo, hi]");
    cfg.gen.rho_min = r[0];
    cfg.gen.rho_max = r[1];
  }
  if (sys.contains("c_range")) {
    const auto r = sys.at("c_range").get<std::vector<double>>();
    if (r.size() != 2) bad_field("system.c_range", "expected [lo, hi]");
    cfg.gen.c_min = r[0];
    cfg.gen.c_max = r[1];
  }
  cfg.gen.drop_prob = cfg.drop_prob;
  if (sys.contains("processes") || sys.contains("channel_dist")) {
    if (!sys.contains("processes") || !sys.contains("channel_dist"))
      bad_field("system", "explicit systems need both processes and channel_dist");
    cfg.explicit_system = sys.dump();
  }

  cfg.reward = reward_kind_from_string(get_or<std::string>(j, "reward", "sum_mse"));
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    cfg.solver.gamma = get_or<double>(s, "gamma", 0.95);
    cfg.solver.tol = get_or<double>(s, "tol", 1e-8);
    cfg.solver.max_iter = get_or<long>(s, "max_iter", 100000);
  }

  if (!j.contains("agents") || !j.at("agents").is_array() || j.at("agents").empty())
    bad_field("agents", "need a non-empty agent list");
  for (size_t i = 0; i < j.at("agents").size(); ++i) {
    const json& a = j.at("agents")[i];
    AgentSpec spec;
    if (!a.contains("algorithm"))
      bad_field("agents[" + std::to_string(i) + "].algorithm", "missing");
    try {
      spec.algorithm = algorithm_from_string(a.at("algorithm").get<std::string>());
    } catch (const ValidationError& e) {
      bad_field("agents[" + std::to_string(i) + "].algorithm", e.what());
    }
    spec.name = get_or<std::string>(a, "name", to_string(spec.algorithm));
    spec.overrides = a.dump();
    cfg.agents.push_back(std::move(spec));
  }

  cfg.train_seeds = get_or<std::vector<std::uint64_t>>(j, "train_seeds", cfg.train_seeds);
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    cfg.eval_steps = get_or<long>(e, "steps", 10000);
    cfg.eval_seeds = get_or<std::vector<std::uint64_t>>(e, "seeds", cfg.eval_seeds);
  }
  cfg.clamp_tau_in_training = get_or<bool>(j, "clamp_tau_in_training", false);
  cfg.clamp_tau_in_eval = get_or<bool>(j, "clamp_tau_in_eval", true);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
  cfg.workers = get_or<int>(j, "workers", 0);
  cfg.max_dqn_actions = get_or<long>(j, "max_dqn_actions", 4096);
  if (j.contains("divergence")) {
    const json& d = j.at("divergence");
    cfg.mse_limit = get_or<double>(d, "mse_limit", 1e6);
    cfg.tau_limit = get_or<long>(d, "tau_limit", 10000);
  }
  cfg.curve_window = get_or<int>(j, "curve_window", 10);
  return cfg;
}

namespace {

GeneratedSystem build_system(const ExperimentConfig& cfg) {
  if (cfg.explicit_system.empty())
    return generate_random_system(cfg.sensors, cfg.channels, cfg.gen, cfg.system_seed);

  const json sys = json::parse(cfg.explicit_system);
  GeneratedSystem out;
  for (size_t n = 0; n < sys.at("processes").size(); ++n) {
    const json& p = sys.at("processes")[n];
    const std::string field = "system.processes[" + std::to_string(n) + "]";
    const Eigen::MatrixXd A = matrix_from_json(p.at("A"), field + ".A");
    const Eigen::MatrixXd C = matrix_from_json(p.at("C"), field + ".C");
    const Eigen::MatrixXd W = p.contains("W")
                                  ? matrix_from_json(p.at("W"), field + ".W")
                                  : Eigen::MatrixXd(Eigen::MatrixXd::Identity(A.rows(), A.rows()));
    const Eigen::MatrixXd V = p.contains("V")
                                  ? matrix_from_json(p.at("V"), field + ".V")
                                  : Eigen::MatrixXd(Eigen::MatrixXd::Identity(C.rows(), C.rows()));
    out.processes.push_back(ProcessModel::make(A, C, W, V));
  }
  if (out.processes.size() != static_cast<size_t>(cfg.sensors))
    bad_field("system.processes", "need one process per sensor");

  std::vector<std::vector<double>> dist;
  const json& cd = sys.at("channel_dist");
  if (cd.size() != static_cast<size_t>(cfg.sensors))
    bad_field("system.channel_dist", "need one row per sensor");
  for (const auto& row : cd) {
    if (row.size() != static_cast<size_t>(cfg.channels))
      bad_field("system.channel_dist", "need one pmf per channel");
    for (const auto& pmf : row) dist.push_back(pmf.get<std::vector<double>>());
  }
  out.channel = ChannelModel::make(cfg.sensors, cfg.channels, cfg.drop_prob, std::move(dist));
  return out;
}

void write_system_json(const ExperimentConfig& cfg, const GeneratedSystem& sys,
                       const SolvedMdp* solved, const std::string& path) {
  json j;
  j["label"] = cfg.label;
  j["sensors"] = cfg.sensors;
  j["channels"] = cfg.channels;
  j["levels"] = sys.channel.levels;
  j["drop_prob"] = sys.channel.drop_prob;
  j["tau_max"] = cfg.tau_max;
  j["reward"] = to_string(cfg.reward);
  j["gamma"] = cfg.solver.gamma;
  j["tol"] = cfg.solver.tol;
  j["seed"] = cfg.system_seed;
  if (solved) {
    j["residual"] = solved->value.residual;
    j["sweeps"] = solved->value.sweeps;
  }
  json procs = json::array();
  for (const auto& p : sys.processes) {
    json pj;
    pj["A"] = matrix_to_json(p.A);
    pj["C"] = matrix_to_json(p.C);
    pj["W"] = matrix_to_json(p.W);
    pj["V"] = matrix_to_json(p.V);
    pj["spectral_radius"] = p.spectral_radius;
    procs.push_back(std::move(pj));
  }
  j["processes"] = std::move(procs);
  json cd = json::array();
  for (int n = 0; n < cfg.sensors; ++n) {
    json row = json::array();
    for (int m = 0; m < cfg.channels; ++m) row.push_back(sys.channel.q(n, m));
    cd.push_back(std::move(row));
  }
  j["channel_dist"] = std::move(cd);
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_solution_csv(const SolvedMdp& solved, const std::string& path) {
  const StateSpace& space = solved.model.space();
  csv::Writer w(path);
  std::vector<std::string> header;
  for (int n = 1; n <= space.sensors(); ++n) header.push_back("tau_" + std::to_string(n));
  for (int n = 1; n <= space.sensors(); ++n)
    for (int m = 1; m <= space.channels(); ++m)
      header.push_back("h_" + std::to_string(n) + "_" + std::to_string(m));
  header.push_back("value");
  header.push_back("action");
  for (int n = 1; n <= space.sensors(); ++n) header.push_back("a_" + std::to_string(n));
  w.row(header);
  for (long s = 0; s < space.size(); ++s) {
    const SystemState st = space.decode(s);
    std::vector<std::string> row;
    for (int t : st.tau) row.push_back(std::to_string(t));
    for (int h : st.h) row.push_back(std::to_string(h));
    row.push_back(csv::fmt(solved.value.v[s]));
    const int a = solved.policy.action[s];
    row.push_back(std::to_string(a));
    for (int an : solved.model.actions()[a].a) row.push_back(std::to_string(an));
    w.row(row);
  }
}

void write_report_csv(const ViolationReport& report, const std::string& path) {
  csv::Writer w(path);
  w.row({"state", "paired_state", "sensor", "other_sensor", "channel", "action_at_state",
         "action_at_pair", "lhs", "rhs"});
  for (const auto& wit : report.witnesses)
    w.row({std::to_string(wit.state), std::to_string(wit.paired_state),
           std::to_string(wit.sensor), std::to_string(wit.other_sensor),
           std::to_string(wit.channel), std::to_string(wit.action_at_state),
           std::to_string(wit.action_at_pair), csv::fmt(wit.lhs), csv::fmt(wit.rhs)});
}

StructureSummary summarize(const ViolationReport& r) {
  StructureSummary s;
  s.kind = r.kind;
  s.violations = static_cast<long>(r.witnesses.size());
  s.checked_pairs = r.checked_pairs;
  s.tie_excluded = r.tie_excluded;
  s.precondition_skipped = r.precondition_skipped;
  return s;
}

std::vector<StructureSummary> run_structure_checks(const SolvedMdp& solved,
                                                   const std::string& dir) {
  const StateSpace& space = solved.model.space();
  const double slack = solved.default_slack();
  const PolicyView view = view_of(solved, slack);

  std::vector<ViolationReport> reports;
  reports.push_back(check_channel_threshold(space, view));
  reports.push_back(check_monotonicity(space, solved.value.v, slack));
  if (space.channels() == 1) {
    const int floor = space.sensors() <= 2 ? 1 : space.tau_max() - 4;
    reports.push_back(check_aoi_threshold(space, view, floor));
    const int gap = space.sensors() <= 2 ? 0 : space.tau_max() / 2;
    reports.push_back(check_prob_supermodularity(space, solved.model.channel(), solved.value.v,
                                                 slack, gap));
  } else {
    reports.push_back(check_proposition1(space, view));
  }

  std::vector<StructureSummary> summaries;
  std::ofstream txt(dir + "/structure_summary.txt");
  for (const auto& r : reports) {
    write_report_csv(r, dir + "/structure_" + std::string(to_string(r.kind)) + ".csv");
    txt << to_string(r.kind) << ": " << (r.passed() ? "PASS" : "FAIL") << " violations="
        << r.witnesses.size() << " checked=" << r.checked_pairs
        << " tie_excluded=" << r.tie_excluded;
    if (r.kind == StructureProperty::proposition1)
      txt << " precondition_skipped=" << r.precondition_skipped;
    txt << "\n";
    summaries.push_back(summarize(r));
  }
  return summaries;
}

void write_metrics_csv(const std::vector<EpisodeMetrics>& metrics, const std::string& path) {
  csv::Writer w(path);
  w.row({"episode", "stage", "avg_sum_mse", "avg_sum_aoi", "epsilon", "xi", "loss"});
  for (const auto& m : metrics)
    w.row({std::to_string(m.episode), std::to_string(m.stage), csv::fmt(m.avg_sum_mse),
           csv::fmt(m.avg_sum_aoi), csv::fmt(m.epsilon), csv::fmt(m.xi), csv::fmt(m.mean_loss)});
}

void write_eval_csv(const EvalResult& r, const std::string& path) {
  csv::Writer w(path);
  w.row({"step", "sum_mse", "sum_aoi"});
  for (size_t i = 0; i < r.step_sum_mse.size(); ++i)
    w.row({std::to_string(i), csv::fmt(r.step_sum_mse[i]), csv::fmt(r.step_sum_aoi[i])});
}

PolicyFn random_baseline_policy(int sensors, int channels, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [sensors, channels, rng](const SystemState&) {
    return random_valid_action(sensors, channels, *rng);
  };
}

PolicyFn greedy_aoi_baseline_policy(int sensors, int channels) {
  // Stalest sensors first; each picks its best remaining channel.
  return [sensors, channels](const SystemState& s) {
    std::vector<int> order(sensors);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&s](int a, int b) { return s.tau[a] > s.tau[b]; });
    ScheduleAction action;
    action.a.assign(sensors, 0);
    std::vector<bool> channel_used(channels, false);
    for (int k = 0; k < channels; ++k) {
      const int n = order[k];
      int best = -1;
      for (int m = 0; m < channels; ++m) {
        if (channel_used[m]) continue;
        if (best < 0 || s.level(n, m, channels) > s.level(n, best, channels)) best = m;
      }
      channel_used[best] = true;
      action.a[n] = best + 1;
    }
    return action;
  };
}

struct AgentJob {
  AgentSpec spec;
  std::uint64_t train_seed = 0;
  bool trained = false;  // RL agents train; baselines only evaluate
};

DqnConfig dqn_config_from(const json& o, const ExperimentConfig& cfg, bool vanilla) {
  DqnConfig c;
  c.gamma = cfg.solver.gamma;
  c.hidden = get_or<std::vector<int>>(o, "hidden", c.hidden);
  c.lr = get_or<double>(o, "lr", c.lr);
  c.lr_decay = get_or<double>(o, "lr_decay", c.lr_decay);
  c.gamma = get_or<double>(o, "gamma", c.gamma);
  c.epsilon0 = get_or<double>(o, "epsilon0", c.epsilon0);
  c.xi0 = get_or<double>(o, "xi0", c.xi0);
  c.explore_decay = get_or<double>(o, "explore_decay", c.explore_decay);
  c.explore_floor = get_or<double>(o, "explore_floor", c.explore_floor);
  c.batch = get_or<int>(o, "batch", c.batch);
  c.replay_capacity = get_or<int>(o, "replay", c.replay_capacity);
  c.target_period = get_or<int>(o, "target_period", c.target_period);
  c.alpha1 = get_or<double>(o, "alpha1", c.alpha1);
  if (o.contains("episodes")) {
    const auto e = o.at("episodes").get<std::vector<int>>();
    if (e.size() != 3) bad_field("episodes", "expected [loose, tight, conventional]");
    c.loose_episodes = e[0];
    c.tight_episodes = e[1];
    c.conventional_episodes = e[2];
  }
  c.steps_per_episode = get_or<int>(o, "steps_per_episode", c.steps_per_episode);
  c.tau_norm = get_or<double>(o, "tau_norm", c.tau_norm);
  c.reward_scale = get_or<double>(o, "reward_scale", c.reward_scale);
  c.disable_channel_threshold =
      get_or<bool>(o, "disable_channel_threshold", c.disable_channel_threshold);
  c.skip_loose_stage = get_or<bool>(o, "skip_loose_stage", c.skip_loose_stage);
  c.action_cap = cfg.max_dqn_actions;
  if (vanilla) {
    // The vanilla baseline is the same loop with the structure stages empty.
    c.conventional_episodes = c.total_episodes();
    c.loose_episodes = 0;
    c.tight_episodes = 0;
  }
  return c;
}

DdpgConfig ddpg_config_from(const json& o, const ExperimentConfig& cfg, bool vanilla) {
  DdpgConfig c;
  c.gamma = cfg.solver.gamma;
  c.hidden = get_or<std::vector<int>>(o, "hidden", c.hidden);
  c.actor_lr = get_or<double>(o, "actor_lr", c.actor_lr);
  c.critic_lr = get_or<double>(o, "critic_lr", c.critic_lr);
  c.lr_decay = get_or<double>(o, "lr_decay", c.lr_decay);
  c.gamma = get_or<double>(o, "gamma", c.gamma);
  c.epsilon0 = get_or<double>(o, "epsilon0", c.epsilon0);
  c.xi0 = get_or<double>(o, "xi0", c.xi0);
  c.explore_decay = get_or<double>(o, "explore_decay", c.explore_decay);
  c.explore_floor = get_or<double>(o, "explore_floor", c.explore_floor);
  c.batch = get_or<int>(o, "batch", c.batch);
  c.replay_capacity = get_or<int>(o, "replay", c.replay_capacity);
  c.delta = get_or<double>(o, "delta", c.delta);
  c.alpha1 = get_or<double>(o, "alpha1", c.alpha1);
  c.alpha2 = get_or<double>(o, "alpha2", c.alpha2);
  c.noise_sigma0 = get_or<double>(o, "noise_sigma0", c.noise_sigma0);
  c.noise_decay = get_or<double>(o, "noise_decay", c.noise_decay);
  if (o.contains("episodes")) {
    const auto e = o.at("episodes").get<std::vector<int>>();
    if (e.size() != 3) bad_field("episodes", "expected [loose, tight, conventional]");
    c.loose_episodes = e[0];
    c.tight_episodes = e[1];
    c.conventional_episodes = e[2];
  }
  c.steps_per_episode = get_or<int>(o, "steps_per_episode", c.steps_per_episode);
  c.tau_norm = get_or<double>(o, "tau_norm", c.tau_norm);
  c.reward_scale = get_or<double>(o, "reward_scale", c.reward_scale);
  c.disable_channel_threshold =
      get_or<bool>(o, "disable_channel_threshold", c.disable_channel_threshold);
  c.skip_loose_stage = get_or<bool>(o, "skip_loose_stage", c.skip_loose_stage);
  if (vanilla) {
    c.conventional_episodes = c.total_episodes();
    c.loose_episodes = 0;
    c.tight_episodes = 0;
  }
  return c;
}

double final10(const std::vector<EpisodeMetrics>& metrics) {
  if (metrics.empty()) return 0;
  const size_t take = std::min<size_t>(10, metrics.size());
  double acc = 0;
  for (size_t i = metrics.size() - take; i < metrics.size(); ++i) acc += metrics[i].avg_sum_mse;
  return acc / take;
}

void run_pool(std::vector<std::function<void()>>& jobs, int workers) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::atomic<size_t> next{0};
  auto body = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      jobs[i]();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 0; i + 1 < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

ExperimentResult run_impl(const ExperimentConfig& cfg, bool solve_checks_only) {
  // Validate agent feasibility up front so config errors surface before work.
  for (size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto alg = cfg.agents[i].algorithm;
    if (alg == Algorithm::dqn || alg == Algorithm::se_dqn) {
      try {
        count_actions(cfg.sensors, cfg.channels, cfg.max_dqn_actions);
      } catch (const CapacityError&) {
        bad_field("agents[" + std::to_string(i) + "]",
                  "value-table agents need one output per action; the action count exceeds "
                  "max_dqn_actions (" + std::to_string(cfg.max_dqn_actions) + ")");
      }
    }
  }

  fs::create_directories(cfg.output_dir);
  const GeneratedSystem sys = build_system(cfg);

  ExperimentResult result;
  result.output_dir = cfg.output_dir;

  const bool want_vi = std::any_of(cfg.agents.begin(), cfg.agents.end(),
                                   [](const AgentSpec& a) { return a.algorithm == Algorithm::vi; });

  std::optional<SolvedMdp> solved;
  std::string vi_error;
  if (want_vi) {
    try {
      StateSpace space(cfg.sensors, cfg.channels, sys.channel.levels, cfg.tau_max);
      MdpModel model(space, sys.channel, sys.processes, cfg.reward);
      solved = solve_mdp(std::move(model), cfg.solver);
      result.vi_solved = true;
      result.vi_residual = solved->value.residual;
      result.vi_sweeps = solved->value.sweeps;
      write_solution_csv(*solved, cfg.output_dir + "/solution.csv");
      result.structure = run_structure_checks(*solved, cfg.output_dir);
    } catch (const std::exception& e) {
      vi_error = e.what();
      result.any_agent_failed = true;
    }
  }
  write_system_json(cfg, sys, solved ? &*solved : nullptr, cfg.output_dir + "/system.json");

  const EvalOptions eval_opts{cfg.eval_steps, cfg.mse_limit, cfg.tau_limit, true};
  auto eval_with = [&](const PolicyFn& policy, std::uint64_t eval_seed,
                       const std::string& log_path) {
    Environment env(sys.channel, sys.processes, cfg.reward,
                    Environment::Options{cfg.clamp_tau_in_eval, cfg.tau_max, cfg.mse_table_len,
                                         std::nullopt},
                    eval_seed);
    const EvalResult r = evaluate_policy(env, policy, eval_opts);
    write_eval_csv(r, log_path);
    EvalSummary s;
    s.seed = eval_seed;
    s.avg_sum_mse = r.avg_sum_mse;
    s.avg_sum_aoi = r.avg_sum_aoi;
    s.diverged = r.diverged;
    return s;
  };

  if (solved) {
    fs::create_directories(cfg.output_dir + "/agents/vi");
    const PolicyFn policy = table_policy(*solved);
    for (const auto es : cfg.eval_seeds)
      result.vi_evals.push_back(
          eval_with(policy, es, cfg.output_dir + "/agents/vi/eval" + std::to_string(es) + ".csv"));
  }

  if (!solve_checks_only) {
    // Fan (agent, train seed) jobs out to the pool; every job owns its
    // environment, nets, and RNG streams and writes only its own files.
    std::vector<AgentJob> jobs;
    for (const auto& spec : cfg.agents) {
      switch (spec.algorithm) {
        case Algorithm::vi:
          break;
        case Algorithm::random_policy:
        case Algorithm::greedy_aoi:
          jobs.push_back(AgentJob{spec, 0, false});
          break;
        default: {
          const json o = json::parse(spec.overrides);
          const auto seeds = get_or<std::vector<std::uint64_t>>(o, "train_seeds", cfg.train_seeds);
          for (const auto ts : seeds) jobs.push_back(AgentJob{spec, ts, true});
        }
      }
    }

    std::vector<AgentRunResult> slots(jobs.size());
    std::vector<std::function<void()>> work;
    for (size_t i = 0; i < jobs.size(); ++i) {
      work.push_back([&, i]() {
        const AgentJob& job = jobs[i];
        AgentRunResult& out = slots[i];
        out.name = job.spec.name;
        out.algorithm = job.spec.algorithm;
        out.train_seed = job.train_seed;
        try {
          const std::string dir = job.trained
                                      ? cfg.output_dir + "/agents/" + job.spec.name + "/seed" +
                                            std::to_string(job.train_seed)
                                      : cfg.output_dir + "/agents/" + job.spec.name;
          fs::create_directories(dir);
          PolicyFn policy;
          Mlp qnet, actor, critic;  // keep trained nets alive for the eval
          if (job.trained) {
            std::mt19937_64 m(job.train_seed);
            const std::uint64_t env_seed = m();
            const std::uint64_t trainer_seed = m();
            Environment env(sys.channel, sys.processes, cfg.reward,
                            Environment::Options{cfg.clamp_tau_in_training, cfg.tau_max,
                                                 cfg.mse_table_len, std::nullopt},
                            env_seed);
            const json o = json::parse(job.spec.overrides);
            if (job.spec.algorithm == Algorithm::dqn || job.spec.algorithm == Algorithm::se_dqn) {
              DqnConfig dc = dqn_config_from(o, cfg, job.spec.algorithm == Algorithm::dqn);
              dc.seed = trainer_seed;
              DqnResult r = train_se_dqn(env, dc);
              out.metrics = std::move(r.metrics);
              qnet = std::move(r.qnet);
              save_mlp(qnet, dir + "/qnet.bin");
              policy = dqn_policy(qnet, enumerate_actions(cfg.sensors, cfg.channels, dc.action_cap),
                                  cfg.channels, sys.channel.levels, dc.tau_norm);
            } else {
              DdpgConfig dc = ddpg_config_from(o, cfg, job.spec.algorithm == Algorithm::ddpg);
              dc.seed = trainer_seed;
              DdpgResult r = train_se_ddpg(env, dc);
              out.metrics = std::move(r.metrics);
              actor = std::move(r.actor);
              critic = std::move(r.critic);
              save_mlp(actor, dir + "/actor.bin");
              save_mlp(critic, dir + "/critic.bin");
              policy = ddpg_policy(actor, cfg.channels, sys.channel.levels, dc.tau_norm);
            }
            write_metrics_csv(out.metrics, dir + "/metrics.csv");
            out.final10_avg_sum_mse = final10(out.metrics);
          } else if (job.spec.algorithm == Algorithm::random_policy) {
            policy = random_baseline_policy(cfg.sensors, cfg.channels, cfg.system_seed ^ 0x7261);
          } else {
            policy = greedy_aoi_baseline_policy(cfg.sensors, cfg.channels);
          }
          for (const auto es : cfg.eval_seeds) {
            const std::string log = job.trained
                                        ? cfg.output_dir + "/agents/" + job.spec.name + "/seed" +
                                              std::to_string(job.train_seed) + "/eval" +
                                              std::to_string(es) + ".csv"
                                        : cfg.output_dir + "/agents/" + job.spec.name + "/eval" +
                                              std::to_string(es) + ".csv";
            out.evals.push_back(eval_with(policy, es, log));
            out.diverged |= out.evals.back().diverged;
          }
        } catch (const std::exception& e) {
          out.ok = false;
          out.error = e.what();
        }
      });
    }
    run_pool(work, cfg.workers);
    for (auto& s : slots) {
      result.any_agent_failed |= !s.ok;
      result.agents.push_back(std::move(s));
    }
  }

  // summary.json: everything the comparison table and downstream tooling need.
  json summary;
  summary["label"] = cfg.label;
  summary["reward"] = to_string(cfg.reward);
  summary["train_seeds"] = cfg.train_seeds;
  json eval_seeds = json::array();
  for (auto s : cfg.eval_seeds) eval_seeds.push_back(s);
  summary["eval_seeds"] = std::move(eval_seeds);
  summary["eval_steps"] = cfg.eval_steps;
  if (want_vi) {
    json vi;
    vi["solved"] = result.vi_solved;
    if (!vi_error.empty()) vi["error"] = vi_error;
    if (result.vi_solved) {
      vi["sweeps"] = result.vi_sweeps;
      vi["residual"] = result.vi_residual;
      json st = json::array();
      for (const auto& s : result.structure) {
        json e;
        e["kind"] = to_string(s.kind);
        e["violations"] = s.violations;
        e["checked_pairs"] = s.checked_pairs;
        e["tie_excluded"] = s.tie_excluded;
        e["precondition_skipped"] = s.precondition_skipped;
        st.push_back(std::move(e));
      }
      vi["structure"] = std::move(st);
      json evals = json::array();
      for (const auto& e : result.vi_evals) {
        json ej;
        ej["seed"] = e.seed;
        ej["avg_sum_mse"] = e.avg_sum_mse;
        ej["avg_sum_aoi"] = e.avg_sum_aoi;
        ej["diverged"] = e.diverged;
        evals.push_back(std::move(ej));
      }
      vi["evals"] = std::move(evals);
    }
    summary["vi"] = std::move(vi);
  }
  json agents = json::array();
  for (const auto& a : result.agents) {
    json aj;
    aj["name"] = a.name;
    aj["algorithm"] = to_string(a.algorithm);
    aj["train_seed"] = a.train_seed;
    aj["ok"] = a.ok;
    if (!a.error.empty()) aj["error"] = a.error;
    aj["diverged"] = a.diverged;
    if (!a.metrics.empty()) aj["final10_avg_sum_mse"] = a.final10_avg_sum_mse;
    json evals = json::array();
    for (const auto& e : a.evals) {
      json ej;
      ej["seed"] = e.seed;
      ej["avg_sum_mse"] = e.avg_sum_mse;
      ej["avg_sum_aoi"] = e.avg_sum_aoi;
      ej["diverged"] = e.diverged;
      evals.push_back(std::move(ej));
    }
    aj["evals"] = std::move(evals);
    agents.push_back(std::move(aj));
  }
  summary["agents"] = std::move(agents);
  result.summary_path = cfg.output_dir + "/summary.json";
  {
    std::ofstream out(result.summary_path);
    out << summary.dump(2) << "\n";
  }
  compare_table({result.summary_path}, cfg.output_dir + "/comparison.csv");
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_impl(config, false);
}

ExperimentResult solve_only(const ExperimentConfig& config) { return run_impl(config, true); }

std::vector<StructureSummary> check_artifact(const std::string& dir,
                                             const std::string& report_dir) {
  std::ifstream in(dir + "/system.json");
  if (!in) throw ValidationError("no system.json under " + dir);
  json j;
  in >> j;

  const int sensors = j.at("sensors").get<int>();
  const int channels = j.at("channels").get<int>();
  const int tau_max = j.at("tau_max").get<int>();
  const auto drop_prob = j.at("drop_prob").get<std::vector<double>>();

  std::vector<ProcessModel> processes;
  for (size_t n = 0; n < j.at("processes").size(); ++n) {
    const json& p = j.at("processes")[n];
    processes.push_back(ProcessModel::make(
        matrix_from_json(p.at("A"), "processes.A"), matrix_from_json(p.at("C"), "processes.C"),
        matrix_from_json(p.at("W"), "processes.W"), matrix_from_json(p.at("V"), "processes.V")));
  }
  std::vector<std::vector<double>> dist;
  for (const auto& row : j.at("channel_dist"))
    for (const auto& pmf : row) dist.push_back(pmf.get<std::vector<double>>());
  ChannelModel channel = ChannelModel::make(sensors, channels, drop_prob, std::move(dist));

  StateSpace space(sensors, channels, channel.levels, tau_max);
  MdpModel model(space, channel, processes, reward_kind_from_string(j.at("reward")));

  std::ifstream sol(dir + "/solution.csv");
  if (!sol) throw ValidationError("no solution.csv under " + dir);
  std::string line;
  std::getline(sol, line);  // header
  ValueTable table;
  table.gamma = j.at("gamma").get<double>();
  table.tol = j.at("tol").get<double>();
  table.residual = j.contains("residual") ? j.at("residual").get<double>() : table.tol;
  table.v.reserve(space.size());
  const int value_col = sensors + sensors * channels;
  while (std::getline(sol, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c <= value_col; ++c)
      if (!std::getline(ss, cell, ',')) throw ValidationError("solution.csv: short row");
    table.v.push_back(std::stod(cell));
  }
  if (static_cast<long>(table.v.size()) != space.size())
    throw ValidationError("solution.csv row count does not match the state space");

  QTable q = q_from_value(model, table);
  Policy policy = greedy_policy(q);
  SolvedMdp solved{std::move(model), std::move(table), std::move(q), std::move(policy)};
  fs::create_directories(report_dir);
  return run_structure_checks(solved, report_dir);
}

void compare_table(const std::vector<std::string>& summary_paths, const std::string& out_csv) {
  if (summary_paths.empty()) throw ValidationError("compare_table: need at least one summary");

  struct Cell {
    double value = 0;
    bool dash = true;
  };
  std::vector<std::string> columns;
  auto column_of = [&columns](const std::string& name) {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    columns.push_back(name);
    return columns.size() - 1;
  };

  struct Row {
    std::string label;
    std::uint64_t seed;
    std::vector<Cell> cells;
  };
  std::vector<Row> rows;
  long eval_steps = -1;

  for (const auto& path : summary_paths) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open summary: " + path);
    json j;
    in >> j;
    const long steps = j.at("eval_steps").get<long>();
    if (eval_steps < 0) eval_steps = steps;
    if (steps != eval_steps)
      throw ValidationError("summaries use different evaluation protocols (steps " +
                            std::to_string(steps) + " vs " + std::to_string(eval_steps) + ")");

    const std::string label = j.at("label").get<std::string>();
    auto seeds = j.at("train_seeds").get<std::vector<std::uint64_t>>();
    if (seeds.empty()) seeds.push_back(0);
    const size_t row0 = rows.size();
    for (const auto s : seeds) rows.push_back(Row{label, s, {}});

    auto put = [&](const std::string& agent, std::uint64_t seed, bool per_seed, double mean,
                   bool dash) {
      const size_t col = column_of(agent);
      for (size_t r = row0; r < rows.size(); ++r) {
        if (per_seed && rows[r].seed != seed) continue;
        if (rows[r].cells.size() <= col) rows[r].cells.resize(col + 1);
        rows[r].cells[col] = Cell{mean, dash};
      }
    };

    auto mean_eval = [](const json& evals, bool& diverged) {
      double acc = 0;
      long n = 0;
      for (const auto& e : evals) {
        diverged |= e.at("diverged").get<bool>();
        acc += e.at("avg_sum_mse").get<double>();
        ++n;
      }
      return n ? acc / n : 0.0;
    };

    if (j.contains("vi") && j.at("vi").value("solved", false)) {
      bool diverged = false;
      const double mean = mean_eval(j.at("vi").at("evals"), diverged);
      put("vi", 0, false, mean, diverged);
    }
    for (const auto& a : j.at("agents")) {
      bool diverged = a.value("diverged", false) || !a.value("ok", true);
      const double mean = a.value("ok", true) ? mean_eval(a.at("evals"), diverged) : 0.0;
      const std::string alg = a.at("algorithm").get<std::string>();
      const bool per_seed = alg != "random" && alg != "greedy_aoi";
      put(a.at("name").get<std::string>(), a.at("train_seed").get<std::uint64_t>(), per_seed,
          mean, diverged);
    }
  }

  csv::Writer w(out_csv);
  std::vector<std::string> header{"system", "train_seed"};
  header.insert(header.end(), columns.begin(), columns.end());
  w.row(header);
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.label, std::to_string(row.seed)};
    for (size_t c = 0; c < columns.size(); ++c) {
      if (c < row.cells.size() && !row.cells[c].dash)
        cells.push_back(csv::fmt(row.cells[c].value));
      else
        cells.push_back("-");
    }
    w.row(cells);
  }
}

void export_curves(const std::string& metrics_csv, int window, const std::string& out_csv) {
  if (window < 1) throw ValidationError("export_curves: window must be >= 1");
  std::ifstream in(metrics_csv);
  if (!in) throw ValidationError("cannot open metrics csv: " + metrics_csv);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty metrics csv");

  struct RowIn {
    std::string episode, stage;
    double mse, aoi;
  };
  std::vector<RowIn> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    RowIn r;
    std::string cell;
    std::getline(ss, r.episode, ',');
    std::getline(ss, r.stage, ',');
    std::getline(ss, cell, ',');
    r.mse = std::stod(cell);
    std::getline(ss, cell, ',');
    r.aoi = std::stod(cell);
    rows.push_back(std::move(r));
  }

  // Trailing moving average; early positions average the available prefix.
  csv::Writer w(out_csv);
  w.row({"episode", "stage", "avg_sum_mse", "smoothed_avg_sum_mse", "avg_sum_aoi",
         "smoothed_avg_sum_aoi"});
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t from = i + 1 >= static_cast<size_t>(window) ? i + 1 - window : 0;
    double mse = 0, aoi = 0;
    for (size_t k = from; k <= i; ++k) {
      mse += rows[k].mse;
      aoi += rows[k].aoi;
    }
    const double count = static_cast<double>(i - from + 1);
    w.row({rows[i].episode, rows[i].stage, csv::fmt(rows[i].mse), csv::fmt(mse / count),
           csv::fmt(rows[i].aoi), csv::fmt(aoi / count)});
  }
}

}  // namespace remsched
