// Command-line front end: run experiments, solve and check exact instances,
// merge comparison tables, export training curves.
//
// Exit codes: 0 success, 1 validation error, 2 convergence or agent failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "remsched/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kConvergence = 2;

void print_structure(const std::vector<remsched::StructureSummary>& summaries) {
  for (const auto& s : summaries) {
    std::cout << "  " << remsched::to_string(s.kind) << ": "
              << (s.violations == 0 ? "PASS" : "FAIL") << " (violations=" << s.violations
              << ", checked=" << s.checked_pairs << ", ties=" << s.tie_excluded;
    if (s.kind == remsched::StructureProperty::proposition1)
      std::cout << ", skipped=" << s.precondition_skipped;
    std::cout << ")\n";
  }
}

int report_result(const remsched::ExperimentResult& result) {
  if (result.vi_solved) {
    std::cout << "vi: solved in " << result.vi_sweeps << " sweeps, residual "
              << result.vi_residual << "\n";
    print_structure(result.structure);
    for (const auto& e : result.vi_evals)
      std::cout << "  eval seed " << e.seed << ": avg_sum_mse=" << e.avg_sum_mse
                << " avg_sum_aoi=" << e.avg_sum_aoi << (e.diverged ? " (diverged)" : "") << "\n";
  }
  for (const auto& a : result.agents) {
    std::cout << a.name;
    if (a.algorithm != remsched::Algorithm::random_policy &&
        a.algorithm != remsched::Algorithm::greedy_aoi)
      std::cout << " (seed " << a.train_seed << ")";
    if (!a.ok) {
      std::cout << ": FAILED: " << a.error << "\n";
      continue;
    }
    for (const auto& e : a.evals)
      std::cout << ": eval seed " << e.seed << " avg_sum_mse=" << e.avg_sum_mse
                << (e.diverged ? " (diverged)" : "");
    std::cout << "\n";
  }
  std::cout << "outputs in " << result.output_dir << "\n";
  return result.any_agent_failed ? kConvergence : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduling toolkit for remote state estimation over fading channels"};
  app.require_subcommand(1);

  std::string config_path, artifact_dir, report_dir, out_path, metrics_path;
  std::vector<std::string> summaries;
  int window = 10;

  auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
  run->add_option("config", config_path, "JSON experiment config")->required();

  auto* solve = app.add_subcommand("solve", "Exact solve + structure checks only");
  solve->add_option("config", config_path, "JSON experiment config")->required();

  auto* check = app.add_subcommand("check", "Re-run structure checks on a solve artifact");
  check->add_option("artifact", artifact_dir, "directory with system.json and solution.csv")
      ->required();
  check->add_option("-o,--report-dir", report_dir, "where to write the reports (default: artifact)");

  auto* table = app.add_subcommand("table", "Merge experiment summaries into a comparison table");
  table->add_option("summaries", summaries, "summary.json files")->required();
  table->add_option("-o,--output", out_path, "output CSV")->default_val("comparison.csv");

  auto* curves = app.add_subcommand("curves", "Export smoothed training curves from metrics");
  curves->add_option("metrics", metrics_path, "metrics.csv of one training run")->required();
  curves->add_option("-w,--window", window, "moving-average window")->default_val(10);
  curves->add_option("-o,--output", out_path, "output CSV")->default_val("curves.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return report_result(remsched::run_experiment(remsched::ExperimentConfig::from_file(config_path)));
    }
    if (solve->parsed()) {
      return report_result(remsched::solve_only(remsched::ExperimentConfig::from_file(config_path)));
    }
    if (check->parsed()) {
      const std::string dir = report_dir.empty() ? artifact_dir : report_dir;
      const auto summaries_out = remsched::check_artifact(artifact_dir, dir);
      print_structure(summaries_out);
      std::cout << "reports in " << dir << "\n";
      return kOk;
    }
    if (table->parsed()) {
      remsched::compare_table(summaries, out_path);
      std::cout << "wrote " << out_path << "\n";
      return kOk;
    }
    if (curves->parsed()) {
      remsched::export_curves(metrics_path, window, out_path);
      std::cout << "wrote " << out_path << "\n";
      return kOk;
    }
  } catch (const remsched::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const remsched::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConvergence;
  }
  return kOk;
}
