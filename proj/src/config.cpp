#include "rsrf/config.hpp"

#include <fstream>
#include <type_traits>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const json& j, const char* name) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string(name) + ": expected 3 numbers");
  return {v[0], v[1], v[2]};
}

json aabb_json(const Aabb& b) { return {{"min", vec3_json(b.min)}, {"max", vec3_json(b.max)}}; }

Aabb aabb_from(const json& j, const char* name) {
  Aabb b{vec3_from(j.at("min"), name), vec3_from(j.at("max"), name)};
  if (!(b.min.array() < b.max.array()).all()) throw ConfigError(std::string(name) + ": min must be < max");
  return b;
}

// Reads `key` into `out` when present, reporting the dotted path on type errors.
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (j.at(key).is_number() && j.at(key).get<double>() < 0.0) {
      throw ConfigError(where + "." + key + ": must be >= 0");
    }
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string_view format_name(ImageFormat f) { return f == ImageFormat::Png ? "png" : "pfm"; }

ImageFormat format_from(const std::string& s) {
  if (s == "png") return ImageFormat::Png;
  if (s == "pfm") return ImageFormat::Pfm;
  throw ConfigError("synth.format: expected png or pfm, got '" + s + "'");
}

json train_json(const TrainConfig& t) {
  return {{"steps", t.steps},
          {"pixels_per_step", t.pixels_per_step},
          {"lr_field", {t.lr_field_init, t.lr_field_final}},
          {"lr_pose", {t.lr_pose_init, t.lr_pose_final}},
          {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}},
          {"c2f", t.c2f},
          {"c2f_window", {t.c2f_start, t.c2f_end}},
          {"rolling_shutter", t.rolling_shutter}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  const std::string w = "train";
  read(j, "steps", t.steps, w);
  read(j, "pixels_per_step", t.pixels_per_step, w);
  auto pair = [&](const char* key, double& a, double& b) {
    if (!j.contains(key)) return;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(w + "." + key + ": expected [initial, final]");
    a = v[0];
    b = v[1];
  };
  pair("lr_field", t.lr_field_init, t.lr_field_final);
  pair("lr_pose", t.lr_pose_init, t.lr_pose_final);
  if (j.contains("adam")) {
    read(j["adam"], "beta1", t.adam.beta1, w + ".adam");
    read(j["adam"], "beta2", t.adam.beta2, w + ".adam");
    read(j["adam"], "epsilon", t.adam.epsilon, w + ".adam");
  }
  read(j, "c2f", t.c2f, w);
  if (j.contains("c2f_window")) {
    const auto v = j["c2f_window"].get<std::vector<std::size_t>>();
    if (v.size() != 2) throw ConfigError("train.c2f_window: expected [start, end]");
    t.c2f_start = v[0];
    t.c2f_end = v[1];
  }
  read(j, "rolling_shutter", t.rolling_shutter, w);
  return t;
}

json field_json(const FieldConfig& f) {
  json j{{"backend", f.backend},
         {"resolution", f.resolution},
         {"init_density", f.init_density},
         {"init_color", f.init_color},
         {"mlp",
          {{"hidden", f.mlp.hidden},
           {"color_hidden", f.mlp.color_hidden},
           {"pos_order", f.mlp.pos_order},
           {"dir_order", f.mlp.dir_order},
           {"seed", f.mlp.seed},
           {"init_density", f.mlp.init_density}}}};
  if (f.has_bounds) j["bounds"] = aabb_json(f.bounds);
  return j;
}

FieldConfig field_from(const json& j) {
  FieldConfig f;
  const std::string w = "field";
  read(j, "backend", f.backend, w);
  if (f.backend != "voxel" && f.backend != "mlp") {
    throw ConfigError("field.backend: expected voxel or mlp, got '" + f.backend + "'");
  }
  read(j, "resolution", f.resolution, w);
  for (const int r : f.resolution) {
    if (r < 2) throw ConfigError("field.resolution: every axis needs at least 2 vertices");
  }
  read(j, "init_density", f.init_density, w);
  read(j, "init_color", f.init_color, w);
  if (j.contains("bounds")) {
    f.has_bounds = true;
    f.bounds = aabb_from(j["bounds"], "field.bounds");
  }
  if (j.contains("mlp")) {
    const auto& m = j["mlp"];
    read(m, "hidden", f.mlp.hidden, w + ".mlp");
    read(m, "color_hidden", f.mlp.color_hidden, w + ".mlp");
    read(m, "pos_order", f.mlp.pos_order, w + ".mlp");
    read(m, "dir_order", f.mlp.dir_order, w + ".mlp");
    read(m, "seed", f.mlp.seed, w + ".mlp");
    read(m, "init_density", f.mlp.init_density, w + ".mlp");
  }
  return f;
}

}  // namespace

TrainConfig RunConfig::effective_train() const {
  TrainConfig t = train;
  t.seed = seed;
  t.threads = threads;
  return t;
}

json sampling_to_json(const SamplingConfig& s) {
  return {{"near", s.near},
          {"far", s.far},
          {"n_samples", s.n_samples},
          {"stratified", s.stratified},
          {"rng_seed", s.rng_seed},
          {"background", vec3_json(s.background)}};
}

SamplingConfig sampling_from_json(const json& j) {
  SamplingConfig s;
  const std::string w = "sampling";
  read(j, "near", s.near, w);
  read(j, "far", s.far, w);
  read(j, "n_samples", s.n_samples, w);
  read(j, "stratified", s.stratified, w);
  read(j, "rng_seed", s.rng_seed, w);
  if (j.contains("background")) s.background = vec3_from(j["background"], "sampling.background");
  s.validate();
  return s;
}

json to_json(const RunConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["trajectory"] = std::string(to_string(c.trajectory));
  j["field"] = field_json(c.field);
  j["sampling"] = sampling_to_json(c.sampling);
  j["train"] = train_json(c.train);
  j["init"] = {{"mode", c.init.mode},
               {"rot_noise_deg", c.init.rot_noise_deg},
               {"trans_noise_frac", c.init.trans_noise_frac},
               {"scene_extent", c.init.scene_extent}};
  j["synth"] = {{"scene", c.synth.scene},
                {"motion", c.synth.motion},
                {"intrinsics", intrinsics_to_json(c.synth.intrinsics)},
                {"num_frames", c.synth.num_frames},
                {"t0", c.synth.t0},
                {"frame_interval", c.synth.frame_interval},
                {"line_readout", c.synth.line_readout},
                {"format", format_name(c.synth.format)},
                {"sampling", sampling_to_json(c.synth.sampling)}};
  j["render"] = {{"checkpoint", c.render.checkpoint}, {"times", c.render.times}, {"fps", c.render.fps}};
  if (c.render.has_range) j["render"]["range"] = {c.render.start, c.render.end};
  j["eval"] = {{"estimate", c.eval.estimate},
               {"reference", c.eval.reference},
               {"alignment", to_string(c.eval.alignment)},
               {"rpe_delta", c.eval.rpe_delta},
               {"ate_samples", c.eval.ate_samples}};
  j["write_row_trajectory"] = c.write_row_trajectory;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  RunConfig c;
  try {
    read(j, "dataset", c.dataset, "config");
    read(j, "output", c.output, "config");
    read(j, "seed", c.seed, "config");
    read(j, "threads", c.threads, "config");
    if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
    if (j.contains("trajectory")) c.trajectory = trajectory_kind_from_string(j["trajectory"].get<std::string>());
    if (j.contains("field")) c.field = field_from(j["field"]);
    if (j.contains("sampling")) c.sampling = sampling_from_json(j["sampling"]);
    if (j.contains("train")) c.train = train_from(j["train"]);
    if (j.contains("init")) {
      const auto& i = j["init"];
      read(i, "mode", c.init.mode, "init");
      if (c.init.mode != "noisy_gt" && c.init.mode != "gt" && c.init.mode != "identity") {
        throw ConfigError("init.mode: expected noisy_gt, gt or identity, got '" + c.init.mode + "'");
      }
      read(i, "rot_noise_deg", c.init.rot_noise_deg, "init");
      read(i, "trans_noise_frac", c.init.trans_noise_frac, "init");
      read(i, "scene_extent", c.init.scene_extent, "init");
      if (c.init.rot_noise_deg < 0.0 || c.init.trans_noise_frac < 0.0) {
        throw ConfigError("init: noise levels must be >= 0");
      }
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      read(s, "scene", c.synth.scene, "synth");
      read(s, "motion", c.synth.motion, "synth");
      if (s.contains("intrinsics")) c.synth.intrinsics = intrinsics_from_json(s["intrinsics"]);
      read(s, "num_frames", c.synth.num_frames, "synth");
      read(s, "t0", c.synth.t0, "synth");
      read(s, "frame_interval", c.synth.frame_interval, "synth");
      read(s, "line_readout", c.synth.line_readout, "synth");
      if (s.contains("format")) c.synth.format = format_from(s["format"].get<std::string>());
      if (s.contains("sampling")) c.synth.sampling = sampling_from_json(s["sampling"]);
      if (c.synth.num_frames < 1) throw ConfigError("synth.num_frames: must be >= 1");
    }
    if (j.contains("render")) {
      const auto& r = j["render"];
      read(r, "checkpoint", c.render.checkpoint, "render");
      read(r, "times", c.render.times, "render");
      read(r, "fps", c.render.fps, "render");
      if (c.render.fps < 0.0) throw ConfigError("render.fps: must be >= 0");
      if (r.contains("range")) {
        const auto v = r["range"].get<std::vector<double>>();
        if (v.size() != 2 || !(v[0] <= v[1])) throw ConfigError("render.range: expected [start, end] with start <= end");
        c.render.has_range = true;
        c.render.start = v[0];
        c.render.end = v[1];
      }
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      read(e, "estimate", c.eval.estimate, "eval");
      read(e, "reference", c.eval.reference, "eval");
      if (e.contains("alignment")) c.eval.alignment = alignment_from_string(e["alignment"].get<std::string>());
      read(e, "rpe_delta", c.eval.rpe_delta, "eval");
      read(e, "ate_samples", c.eval.ate_samples, "eval");
      if (c.eval.ate_samples != "frames" && c.eval.ate_samples != "rows") {
        throw ConfigError("eval.ate_samples: expected frames or rows");
      }
    }
    read(j, "write_row_trajectory", c.write_row_trajectory, "config");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c = run_config_from_json(j);
  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.dataset);
  resolve(c.output);
  resolve(c.render.checkpoint);
  resolve(c.eval.estimate);
  resolve(c.eval.reference);
  return c;
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

}  // namespace rsrf
