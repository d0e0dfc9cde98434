#pragma once

#include <optional>
#include <string>
#include <vector>

#include "remsched/ddpg.hpp"
#include "remsched/dqn.hpp"
#include "remsched/mdp_solver.hpp"
#include "remsched/structure_checks.hpp"
#include "remsched/system_gen.hpp"

namespace remsched {

enum class Algorithm { vi, dqn, se_dqn, ddpg, se_ddpg, random_policy, greedy_aoi };
Algorithm algorithm_from_string(const std::string& name);
const char* to_string(Algorithm a);

struct AgentSpec {
  Algorithm algorithm{};
  std::string name;       // defaults to the algorithm string
  std::string overrides;  // raw JSON object with hyperparameter overrides
};

/// One experiment: a (generated or explicit) system, a reward, a solver
/// setup, a set of agents, and the evaluation protocol. Parsed from a single
/// JSON file; see README for the schema.
struct ExperimentConfig {
  // system block
  int sensors = 2;
  int channels = 1;
  std::vector<double> drop_prob = {0.2, 0.15, 0.1, 0.05, 0.01};
  int tau_max = 16;
  std::uint64_t system_seed = 1;
  int mse_table_len = 64;
  SystemGenSpec gen;
  std::string explicit_system;  // raw JSON with "processes"/"channel_dist", if given

  RewardKind reward = RewardKind::sum_mse;
  ViOptions solver;

  std::vector<AgentSpec> agents;
  std::vector<std::uint64_t> train_seeds = {1};
  long eval_steps = 10000;
  std::vector<std::uint64_t> eval_seeds = {9001};
  bool clamp_tau_in_training = false;
  // Comparison evaluations run on the truncated environment so the exact
  // solution is the optimum of the very process being measured.
  bool clamp_tau_in_eval = true;

  std::string output_dir = "out";
  int workers = 0;  // 0: hardware concurrency
  long max_dqn_actions = 4096;
  double mse_limit = 1e6;
  long tau_limit = 10000;
  int curve_window = 10;
  std::string label = "system";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

struct StructureSummary {
  StructureProperty kind{};
  long violations = 0;
  long checked_pairs = 0;
  long tie_excluded = 0;
  long precondition_skipped = 0;
};

struct EvalSummary {
  std::uint64_t seed = 0;
  double avg_sum_mse = 0;
  double avg_sum_aoi = 0;
  bool diverged = false;
};

struct AgentRunResult {
  std::string name;
  Algorithm algorithm{};
  std::uint64_t train_seed = 0;
  bool ok = true;
  bool diverged = false;  // any eval seed diverged
  std::string error;
  std::vector<EvalSummary> evals;
  double final10_avg_sum_mse = 0;  // trained agents only
  std::vector<EpisodeMetrics> metrics;
};

struct ExperimentResult {
  std::string output_dir;
  std::string summary_path;
  bool vi_solved = false;
  double vi_residual = 0;
  long vi_sweeps = 0;
  std::vector<StructureSummary> structure;
  std::vector<EvalSummary> vi_evals;
  std::vector<AgentRunResult> agents;
  bool any_agent_failed = false;
};

/// Builds (or loads) the system, trains and evaluates every requested agent
/// with a worker pool over (agent, seed) jobs, runs structure checks when the
/// exact solver is requested, and writes metrics/eval CSVs, the comparison
/// table, and a machine-readable summary under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Exact-solver slice of run_experiment: solve, check, export. RL agents in
/// the config are ignored.
ExperimentResult solve_only(const ExperimentConfig& config);

/// Re-runs the structure checks from an exported solve artifact directory
/// (system.json + solution.csv), recomputing action values from the stored
/// value table.
std::vector<StructureSummary> check_artifact(const std::string& dir, const std::string& report_dir);

/// Merges experiment summaries into a comparison table CSV: one row per
/// (system, train seed), one column per agent, dashes for diverged or failed
/// runs.
void compare_table(const std::vector<std::string>& summary_paths, const std::string& out_csv);

/// Episode-versus-smoothed-MSE export of a training metrics CSV. The smoothed
/// column is a trailing moving average; positions with fewer than `window`
/// predecessors average what is available.
void export_curves(const std::string& metrics_csv, int window, const std::string& out_csv);

}  // namespace remsched
