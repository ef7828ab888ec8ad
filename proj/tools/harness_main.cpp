#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "jitai/jitai.hpp"

namespace {

int cmd_run(const std::string& scenario_file, const std::string& out_dir,
            std::uint64_t seed_base, bool live_llm, const std::string& api_key_env, int threads,
            bool no_plots) {
  auto spec = jitai::load_scenario(scenario_file, seed_base);
  spec.output_dir = out_dir;
  spec.live_llm = live_llm;
  if (!api_key_env.empty()) spec.llm.api_key_env_var = api_key_env;
  spec.threads = threads;

  const auto result = jitai::run_sweep(spec);
  if (!no_plots) jitai::emit_plots(result, spec.output_dir);

  std::printf("wrote %zu cells to %s\n", result.cells.size(), out_dir.c_str());
  for (const auto& cell : result.cells) {
    std::printf("p_w11=%g p_w00=%g %s: median=%.1f iqr=[%.1f, %.1f] trials=%ld\n", cell.p_w11,
                cell.p_w00, std::string(jitai::to_string(cell.mode)).c_str(),
                cell.total_reward.median, cell.total_reward.q25, cell.total_reward.q75,
                cell.trials);
  }
  return 0;
}

int cmd_plot(const std::string& in_dir, const std::string& out_dir) {
  const auto result = jitai::read_aggregate_csvs(in_dir);
  jitai::emit_plots(result, out_dir.empty() ? in_dir : out_dir);
  std::printf("rendered plots for %zu cells\n", result.cells.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-count intervention simulator: Thompson Sampling with an optional "
               "language-model send filter"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir;
  std::uint64_t seed_base = 0;
  bool live_llm = false;
  std::string api_key_env;
  int threads = 0;
  bool no_plots = false;

  auto* run = app.add_subcommand("run", "Run a scenario sweep and write CSVs, logs and plots");
  run->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed-base", seed_base, "Offset added to every trial seed");
  run->add_flag("--live-llm", live_llm, "Query the configured chat endpoint instead of the mock");
  run->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
  run->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--no-plots", no_plots, "Skip SVG rendering");

  std::string in_dir;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Re-render SVG plots from a sweep's CSV output");
  plot->add_option("--in", in_dir, "Directory holding summary/histogram/cumulative CSVs")
      ->required();
  plot->add_option("--out", plot_out, "Plot output directory (default: same as --in)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario_file, out_dir, seed_base, live_llm, api_key_env, threads, no_plots);
    }
    return cmd_plot(in_dir, plot_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
