#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rsrf/commands.hpp"
#include "rsrf/config.hpp"
#include "rsrf/error.hpp"

using namespace rsrf;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("rsrf_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast run: 5 frames at 24x18.
RunConfig tiny(const fs::path& root) {
  RunConfig cfg;
  cfg.synth.intrinsics = {24.0, 24.0, 12.0, 9.0, 24, 18};
  cfg.synth.num_frames = 5;
  cfg.synth.line_readout = 0.05 / 18;
  cfg.synth.motion = {{"kind", "screw"}, {"base", {{"eye", {0.0, 0.0, -3.0}}}}, {"twist", {0.1, 0.2, 0, 0.3, 0, 0}}};
  cfg.synth.sampling.near = 1.5;
  cfg.synth.sampling.far = 4.5;
  cfg.synth.sampling.n_samples = 16;
  cfg.sampling = cfg.synth.sampling;
  cfg.field.resolution = {8, 8, 8};
  cfg.train.steps = 0;
  cfg.train.pixels_per_step = 64;
  cfg.dataset = (root / "data").string();
  cfg.output = (root / "data").string();
  return cfg;
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  RunConfig cfg;
  cfg.seed = 77;
  cfg.threads = 3;
  cfg.trajectory = TrajectoryKind::LinearNodep;
  cfg.field.backend = "mlp";
  cfg.field.has_bounds = true;
  cfg.field.bounds = {Vec3(-1, -2, -3), Vec3(1, 2, 3)};
  cfg.train.lr_pose_init = 3e-3;
  cfg.train.rolling_shutter = false;
  cfg.init.mode = "gt";
  cfg.render.times = {0.1, 0.2};
  cfg.render.has_range = true;
  cfg.render.end = 1.0;
  cfg.eval.alignment = Alignment::SE3;
  cfg.synth.format = ImageFormat::Pfm;
  cfg.sampling.background = Vec3(0.1, 0.2, 0.3);
  CHECK(run_config_from_json(to_json(cfg)) == cfg);
  CHECK(run_config_from_json(nlohmann::json::object()) == RunConfig{});

  const fs::path dir = fresh_dir("cfg");
  cfg.dataset = "data";
  save_run_config(dir / "run.json", cfg);
  const RunConfig back = load_run_config(dir / "run.json");
  CHECK(fs::path(back.dataset) == dir / "data");
  CHECK(back.train == cfg.train);
}

TEST_CASE("invalid configs are rejected with the field name") {
  auto message = [](const nlohmann::json& j) {
    try {
      run_config_from_json(j);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({{"trajectory", "quintic"}}).find("trajectory") != std::string::npos);
  CHECK(message({{"train", {{"steps", "many"}}}}).find("steps") != std::string::npos);
  CHECK(message({{"sampling", {{"near", 2.0}, {"far", 1.0}}}}).find("sampling") != std::string::npos);
  CHECK(message({{"threads", 0}}).find("threads") != std::string::npos);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), ConfigError);

  // Readout longer than the frame interval.
  RunConfig cfg = tiny(fresh_dir("badtiming"));
  cfg.synth.line_readout = 0.2 / 18;
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_synth(cfg, log), ConfigError);
}

TEST_CASE("synth is deterministic to the byte") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  std::ostringstream log;
  RunConfig ca = tiny(a), cb = tiny(b);
  cb.threads = 2;
  cmd_synth(ca, log);
  cmd_synth(cb, log);
  for (const char* f : {"meta.json", "rs/frame_0000.png", "rs/frame_0004.png", "gs/frame_0002.png",
                        "traj_gt_rows.txt", "traj_gt_frames.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(a / "data" / f));
    CHECK(slurp(a / "data" / f) == slurp(b / "data" / f));
  }
}

TEST_CASE("zero-step training writes the initial trajectory") {
  const fs::path root = fresh_dir("zero");
  std::ostringstream log;
  RunConfig cfg = tiny(root);
  cmd_synth(cfg, log);
  cfg.output = (root / "run").string();
  cmd_train(cfg, log);
  CHECK(slurp(root / "run" / "traj_init.txt") == slurp(root / "run" / "traj_est.txt"));
  CHECK(fs::exists(root / "run" / "field.ckpt"));
  CHECK(fs::exists(root / "run" / "config.json"));

  cfg.init.mode = "gt";
  cfg.output = (root / "gt").string();
  cmd_train(cfg, log);
  cfg.eval.estimate = (root / "gt").string();
  cfg.eval.reference = (root / "data").string();
  cfg.output = (root / "eval").string();
  const auto report = cmd_eval(cfg, log);
  CHECK(report.at("trajectory").at("ate_rmse").get<double>() < 1e-6);
  CHECK(fs::exists(root / "eval" / "eval.json"));

  cfg.dataset = (root / "missing").string();
  CHECK_THROWS_AS(cmd_train(cfg, log), ConfigError);
}

TEST_CASE("render handles empty and out-of-range requests") {
  const fs::path root = fresh_dir("render");
  std::ostringstream log;
  RunConfig cfg = tiny(root);
  cmd_synth(cfg, log);
  cfg.output = (root / "run").string();
  cmd_train(cfg, log);

  cfg.render.checkpoint = (root / "run").string();
  cfg.output = (root / "frames").string();
  cmd_render(cfg, log);
  CHECK(!fs::exists(root / "frames" / "frame_0000.png"));

  cfg.render.times = {0.05, 0.15};
  cmd_render(cfg, log);
  CHECK(fs::exists(root / "frames" / "frame_0001.png"));
  CHECK(fs::exists(root / "frames" / "times.txt"));

  cfg.render.times = {100.0};
  try {
    cmd_render(cfg, log);
    FAIL("expected TimeOutOfRange");
  } catch (const TimeOutOfRange& e) {
    CHECK(std::string(e.what()).find("valid") != std::string::npos);
    CHECK(exit_code_for(e) == 2);
  }
}

TEST_CASE("eval compares directories and names mismatched files") {
  const fs::path root = fresh_dir("eval");
  std::ostringstream log;
  RunConfig cfg = tiny(root);
  cmd_synth(cfg, log);
  cfg.eval.estimate = cfg.dataset;
  cfg.eval.reference = cfg.dataset;
  cfg.output.clear();
  const auto self = cmd_eval(cfg, log);
  CHECK(self.at("images").at("psnr_mean") == "inf");
  CHECK(self.at("images").at("ssim_mean").get<double>() == doctest::Approx(1.0));
  CHECK(self.at("trajectory").at("ate_rmse").get<double>() < 1e-9);

  RunConfig other = tiny(fresh_dir("eval_other"));
  other.synth.intrinsics = {20.0, 20.0, 10.0, 8.0, 20, 16};
  other.synth.line_readout = 0.05 / 16;
  cmd_synth(other, log);
  cfg.eval.reference = other.dataset;
  try {
    cmd_eval(cfg, log);
    FAIL("expected DimensionMismatch");
  } catch (const DimensionMismatch& e) {
    CHECK(std::string(e.what()).find("frame_0000") != std::string::npos);
    CHECK(exit_code_for(e) == 2);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(IoError("x")) == 2);
  CHECK(exit_code_for(NonFiniteLoss("x")) == 3);
  CHECK(exit_code_for(RotationNearPi("x")) == 3);
  CHECK(exit_code_for(TooFewSamples("x")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}
