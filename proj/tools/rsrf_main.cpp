// rsrf: synthesize rolling-shutter datasets, train, render and evaluate.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsrf/commands.hpp"
#include "rsrf/config.hpp"
#include "rsrf/error.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads, "Worker threads (1 = deterministic mode)")->check(CLI::PositiveNumber);
  cmd->add_option("--output", f.output, "Output directory");
}

rsrf::RunConfig resolve(const CommonFlags& f) {
  rsrf::RunConfig cfg = f.config.empty() ? rsrf::RunConfig{} : rsrf::load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.output) cfg.output = *f.output;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rolling-shutter radiance fields with continuous-time camera trajectories"};
  app.require_subcommand(1);

  CommonFlags synth_f, train_f, render_f, eval_f;
  std::string dataset, checkpoint, estimate, reference, alignment;
  std::vector<double> times;
  std::optional<double> fps;
  std::optional<std::size_t> steps;

  auto* synth = app.add_subcommand("synth", "Render a synthetic rolling-shutter dataset");
  add_common(synth, synth_f);

  auto* train = app.add_subcommand("train", "Jointly optimize a radiance field and camera trajectory");
  add_common(train, train_f);
  train->add_option("--dataset", dataset, "Dataset directory");
  train->add_option("--steps", steps, "Override the number of optimization steps");

  auto* render = app.add_subcommand("render", "Render global-shutter frames at arbitrary times");
  add_common(render, render_f);
  render->add_option("--checkpoint", checkpoint, "Directory written by train");
  render->add_option("--times", times, "Query times in seconds");
  render->add_option("--fps", fps, "Render uniformly at this frame rate over the trajectory window");

  auto* eval = app.add_subcommand("eval", "Compare images and trajectories against a reference");
  add_common(eval, eval_f);
  eval->add_option("estimate", estimate, "Estimate directory");
  eval->add_option("reference", reference, "Reference directory");
  eval->add_option("--alignment", alignment, "se3 or sim3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      rsrf::cmd_synth(resolve(synth_f), std::cout);
    } else if (train->parsed()) {
      auto cfg = resolve(train_f);
      if (!dataset.empty()) cfg.dataset = dataset;
      if (steps) cfg.train.steps = *steps;
      rsrf::cmd_train(cfg, std::cout);
    } else if (render->parsed()) {
      auto cfg = resolve(render_f);
      if (!checkpoint.empty()) cfg.render.checkpoint = checkpoint;
      if (!times.empty()) cfg.render.times = times;
      if (fps) cfg.render.fps = *fps;
      rsrf::cmd_render(cfg, std::cout);
    } else if (eval->parsed()) {
      auto cfg = resolve(eval_f);
      if (!eval_f.output) cfg.output.clear();
      if (!estimate.empty()) cfg.eval.estimate = estimate;
      if (!reference.empty()) cfg.eval.reference = reference;
      if (!alignment.empty()) cfg.eval.alignment = rsrf::alignment_from_string(alignment);
      const auto report = rsrf::cmd_eval(cfg, std::cout);
      std::cout << report.dump() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rsrf::exit_code_for(e);
  }
  return 0;
}
