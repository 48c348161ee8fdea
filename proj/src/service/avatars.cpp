#include "mycloth/service/avatars.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"
#include "mycloth/nn/archive.hpp"
#include "mycloth/train/dataset.hpp"
#include "mycloth/tryon/convert.hpp"

namespace mycloth::service {

namespace fs = std::filesystem;
using nlohmann::json;

AvatarGallery AvatarGallery::load(const fs::path& dir) {
  AvatarGallery g;
  if (!fs::exists(dir / "manifest.json")) return g;
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ConfigError("malformed avatar manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
  try {
    for (const json& entry : manifest.at("avatars")) {
      AvatarSpec a;
      a.avatar_id = entry.at("id").get<std::string>();
      a.display_name = entry.value("display_name", a.avatar_id);
      a.person_image = dir / entry.at("person").get<std::string>();
      a.pose_map = dir / entry.at("pose").get<std::string>();
      a.agnostic_image = dir / entry.at("agnostic").get<std::string>();
      for (const fs::path& p : {a.person_image, a.pose_map, a.agnostic_image}) {
        if (!fs::exists(p)) throw ConfigError("avatar '" + a.avatar_id + "' references missing file " + p.string());
      }
      const design::Raster person = design::read_image(a.person_image);
      const design::Raster agnostic = design::read_image(a.agnostic_image);
      const nn::NamedTensors pose = nn::load_tensors(a.pose_map);
      auto it = pose.find("pose");
      if (it == pose.end() || it->second.rank() != 3) {
        throw ConfigError("avatar '" + a.avatar_id + "' pose archive lacks a (P, H, W) 'pose' entry");
      }
      a.width = person.width();
      a.height = person.height();
      a.pose_channels = it->second.channels();
      if (agnostic.width() != a.width || agnostic.height() != a.height || it->second.height() != a.height ||
          it->second.width() != a.width) {
        throw ConfigError("avatar '" + a.avatar_id + "' files differ in size");
      }
      g.avatars_.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed avatar manifest: " + std::string(e.what()));
  } catch (const LoadError& e) {
    throw ConfigError(std::string("avatar gallery: ") + e.what());
  }
  std::sort(g.avatars_.begin(), g.avatars_.end(),
            [](const AvatarSpec& a, const AvatarSpec& b) { return a.avatar_id < b.avatar_id; });
  return g;
}

const AvatarSpec& AvatarGallery::find(const std::string& id) const {
  for (const AvatarSpec& a : avatars_)
    if (a.avatar_id == id) return a;
  throw NotFoundError("unknown avatar '" + id + "'");
}

tryon::TryOnSample load_avatar_inputs(const AvatarSpec& a) {
  tryon::TryOnSample s;
  s.person = tryon::raster_to_tensor(design::read_image(a.person_image));
  s.agnostic = tryon::raster_to_tensor(design::read_image(a.agnostic_image));
  s.pose = nn::load_tensors(a.pose_map).at("pose");
  return s;
}

void write_seed_gallery(const fs::path& dir) {
  const train::DatasetSplit toy = train::make_toy_dataset(3, 2024);
  json list = json::array();
  for (std::size_t i = 0; i < toy.size(); ++i) {
    const std::string id = "toy-" + std::to_string(i + 1);
    fs::create_directories(dir / id);
    const tryon::TryOnSample& s = toy.samples[i];
    design::write_png(dir / id / "person.png", tryon::tensor_to_raster(s.person));
    design::write_png(dir / id / "agnostic.png", tryon::tensor_to_raster(s.agnostic));
    nn::save_tensors(dir / id / "pose.myct", {{"pose", s.pose}});
    list.push_back({{"id", id},
                    {"display_name", "Toy avatar " + std::to_string(i + 1)},
                    {"person", id + "/person.png"},
                    {"pose", id + "/pose.myct"},
                    {"agnostic", id + "/agnostic.png"}});
  }
  atomic_write(dir / "manifest.json", json{{"avatars", list}}.dump(2) + "\n");
}

design::Rect cloth_frame(int width, int height) {
  return {width / 4, 3 * height / 16, width / 2, 13 * height / 16 - 3 * height / 16};
}

design::Raster garment_cloth_image(const design::Raster& render, const design::Raster& mask, int width, int height) {
  if (mask.width() != render.width() || mask.height() != render.height() || mask.channels() != 1) {
    throw ValidationError("garment mask does not match the render");
  }
  int x0 = render.width(), y0 = render.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y, 0)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw ValidationError("garment mask is empty");
  const int cw = x1 - x0 + 1, ch = y1 - y0 + 1;
  design::Raster crop(cw, ch, 3, 255);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      if (mask.at(x0 + x, y0 + y, 0))
        for (int c = 0; c < 3; ++c) crop.at(x, y, c) = render.at(x0 + x, y0 + y, c);
  const design::Rect frame = cloth_frame(width, height);
  const design::Raster scaled = design::resize_bilinear(crop, frame.w, frame.h);
  design::Raster out(width, height, 3, 255);
  for (int y = 0; y < frame.h; ++y)
    for (int x = 0; x < frame.w; ++x)
      for (int c = 0; c < 3; ++c) out.at(frame.x + x, frame.y + y, c) = scaled.at(x, y, c);
  return out;
}

}  // namespace mycloth::service
