#include "rsrf/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "rsrf/error.hpp"

namespace rsrf {
namespace fs = std::filesystem;

void Dataset::validate() const {
  camera.validate();
  const std::size_t m = camera.num_frames();
  if (rs_images.size() != m) {
    throw ConfigError("dataset has " + std::to_string(rs_images.size()) + " RS images but " +
                      std::to_string(m) + " frame starts");
  }
  if (!gs_images.empty() && gs_images.size() != m) throw ConfigError("dataset GS image count mismatch");
  auto check = [&](const Image& img, const char* kind, std::size_t i) {
    if (img.width != camera.intrinsics.width || img.height != camera.intrinsics.height) {
      throw ConfigError(std::string(kind) + " image " + std::to_string(i) + " is " +
                        std::to_string(img.width) + "x" + std::to_string(img.height) +
                        ", camera expects " + std::to_string(camera.intrinsics.width) + "x" +
                        std::to_string(camera.intrinsics.height));
    }
  };
  for (std::size_t i = 0; i < rs_images.size(); ++i) check(rs_images[i], "RS", i);
  for (std::size_t i = 0; i < gs_images.size(); ++i) check(gs_images[i], "GS", i);
}

std::string frame_filename(std::size_t index, ImageFormat format) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%04zu.%s", index, format == ImageFormat::Png ? "png" : "pfm");
  return buf;
}

nlohmann::json intrinsics_to_json(const Intrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
          {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

Intrinsics intrinsics_from_json(const nlohmann::json& j) {
  Intrinsics intr;
  intr.fx = j.at("fx");
  intr.fy = j.at("fy");
  intr.cx = j.at("cx");
  intr.cy = j.at("cy");
  intr.width = j.at("width");
  intr.height = j.at("height");
  return intr;
}

nlohmann::json timing_to_json(const RsTiming& timing) {
  return {{"line_readout", timing.line_readout}, {"frame_starts", timing.frame_starts}};
}

RsTiming timing_from_json(const nlohmann::json& j) {
  RsTiming t;
  t.line_readout = j.at("line_readout");
  t.frame_starts = j.at("frame_starts").get<std::vector<double>>();
  return t;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  dataset.validate();
  fs::create_directories(dir / "rs");
  if (!dataset.gs_images.empty()) fs::create_directories(dir / "gs");
  nlohmann::json meta;
  meta["intrinsics"] = intrinsics_to_json(dataset.camera.intrinsics);
  meta["timing"] = timing_to_json(dataset.camera.timing);
  meta["image_format"] = dataset.format == ImageFormat::Png ? "png" : "pfm";
  meta["info"] = dataset.info;
  auto& frames = meta["frames"] = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.num_frames(); ++i) {
    const std::string name = frame_filename(i, dataset.format);
    nlohmann::json f{{"index", i},
                     {"timestamp", dataset.camera.timing.frame_starts[i]},
                     {"rs", "rs/" + name}};
    if (!dataset.gs_images.empty()) f["gs"] = "gs/" + name;
    frames.push_back(f);
    auto write = [&](const fs::path& p, const Image& img) {
      if (dataset.format == ImageFormat::Png) write_png(p, img); else write_pfm(p, img);
    };
    write(dir / "rs" / name, dataset.rs_images[i]);
    if (!dataset.gs_images.empty()) write(dir / "gs" / name, dataset.gs_images[i]);
  }
  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
  if (!dataset.gt_rows.empty()) write_tum(dir / "traj_gt_rows.txt", dataset.gt_rows);
  if (!dataset.gt_frames.empty()) write_tum(dir / "traj_gt_frames.txt", dataset.gt_frames);
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) throw ConfigError("dataset " + dir.string() + ": missing meta.json");
  std::ifstream in(meta_path);
  Dataset ds;
  try {
    const auto meta = nlohmann::json::parse(in);
    ds.camera.intrinsics = intrinsics_from_json(meta.at("intrinsics"));
    ds.camera.timing = timing_from_json(meta.at("timing"));
    ds.format = meta.value("image_format", "png") == "pfm" ? ImageFormat::Pfm : ImageFormat::Png;
    ds.info = meta.value("info", nlohmann::json::object());
    for (const auto& f : meta.at("frames")) {
      ds.rs_images.push_back(read_image(dir / f.at("rs").get<std::string>()));
      if (f.contains("gs")) ds.gs_images.push_back(read_image(dir / f.at("gs").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dataset " + dir.string() + ": bad meta.json: " + e.what());
  }
  if (fs::exists(dir / "traj_gt_rows.txt")) ds.gt_rows = read_tum(dir / "traj_gt_rows.txt");
  if (fs::exists(dir / "traj_gt_frames.txt")) ds.gt_frames = read_tum(dir / "traj_gt_frames.txt");
  ds.validate();
  return ds;
}

}  // namespace rsrf
