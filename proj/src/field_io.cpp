#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rsrf/error.hpp"
#include "rsrf/field.hpp"
#include "rsrf/mlp_field.hpp"
#include "rsrf/voxel_grid.hpp"

namespace rsrf {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

nlohmann::json aabb_json(const Aabb& b) {
  return {{"min", {b.min.x(), b.min.y(), b.min.z()}}, {"max", {b.max.x(), b.max.y(), b.max.z()}}};
}

Aabb aabb_from(const nlohmann::json& j) {
  const auto lo = j.at("min").get<std::vector<double>>();
  const auto hi = j.at("max").get<std::vector<double>>();
  return {Vec3(lo.at(0), lo.at(1), lo.at(2)), Vec3(hi.at(0), hi.at(1), hi.at(2))};
}

}  // namespace

void save_field(const std::filesystem::path& path, const TrainableField& field) {
  nlohmann::json h;
  h["format"] = "rsrf-field";
  h["version"] = 1;
  h["backend"] = field.backend();
  h["dtype"] = "float64-le";
  h["num_params"] = field.num_params();
  h["encoding_progress"] = field.encoding_progress();
  if (const auto* v = dynamic_cast<const VoxelGrid*>(&field)) {
    const auto& c = v->config();
    h["resolution"] = c.resolution;
    h["bounds"] = aabb_json(c.bounds);
    h["init_density"] = c.init_density;
    h["init_color"] = c.init_color;
  } else if (const auto* m = dynamic_cast<const MlpField*>(&field)) {
    const auto& c = m->config();
    h["hidden"] = c.hidden;
    h["color_hidden"] = c.color_hidden;
    h["pos_order"] = c.pos_order;
    h["dir_order"] = c.dir_order;
    h["bounds"] = aabb_json(c.bounds);
    h["seed"] = c.seed;
    h["init_density"] = c.init_density;
  } else {
    throw ConfigError("save_field: unsupported backend " + field.backend());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << h.dump() << '\n';
  const auto params = field.params();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

std::unique_ptr<TrainableField> load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::unique_ptr<TrainableField> field;
  try {
    const auto h = nlohmann::json::parse(header);
    if (h.at("format") != "rsrf-field") throw IoError(path.string() + ": not an rsrf field checkpoint");
    const auto backend = h.at("backend").get<std::string>();
    if (backend == "voxel") {
      VoxelGridConfig c;
      c.resolution = h.at("resolution").get<std::array<int, 3>>();
      c.bounds = aabb_from(h.at("bounds"));
      c.init_density = h.at("init_density");
      c.init_color = h.at("init_color");
      field = std::make_unique<VoxelGrid>(c);
    } else if (backend == "mlp") {
      MlpConfig c;
      c.hidden = h.at("hidden");
      c.color_hidden = h.at("color_hidden");
      c.pos_order = h.at("pos_order");
      c.dir_order = h.at("dir_order");
      c.bounds = aabb_from(h.at("bounds"));
      c.seed = h.at("seed");
      c.init_density = h.at("init_density");
      field = std::make_unique<MlpField>(c);
    } else {
      throw IoError(path.string() + ": unknown backend '" + backend + "'");
    }
    if (h.at("num_params").get<std::size_t>() != field->num_params()) {
      throw IoError(path.string() + ": parameter count does not match header configuration");
    }
    field->set_encoding_progress(h.at("encoding_progress").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad checkpoint header: " + e.what());
  }
  auto params = field->params();
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(params.size() * sizeof(double))) {
    throw IoError(path.string() + ": truncated parameter block");
  }
  return field;
}

}  // namespace rsrf
