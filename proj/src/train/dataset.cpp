#include "mycloth/train/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"
#include "mycloth/nn/module.hpp"
#include "mycloth/tryon/convert.hpp"
#include "mycloth/tryon/predictor.hpp"

namespace mycloth::train {

namespace fs = std::filesystem;
using design::Raster;
using design::Rect;
using nn::Tensor;

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw ValidationError("split must be 'train' or 'test'", {{"split", text}});
}

// --- VITON -------------------------------------------------------------------

namespace {

// LIP labels of upper-body garments: upper clothes, dress, coat.
bool is_garment_label(std::uint8_t label) { return label == 5 || label == 6 || label == 7; }

std::string stem(const std::string& name) { return fs::path(name).stem().string(); }

fs::path person_path(const fs::path& dir, const PairEntry& p) { return dir / "image" / p.person; }
fs::path cloth_path(const fs::path& dir, const PairEntry& p) { return dir / "cloth" / p.cloth; }
fs::path parse_path(const fs::path& dir, const PairEntry& p) { return dir / "image-parse" / (stem(p.person) + ".png"); }
fs::path pose_path(const fs::path& dir, const PairEntry& p) {
  return dir / "pose" / (stem(p.person) + "_keypoints.json");
}

Raster read_sized(const fs::path& path, int width, int height) {
  Raster r = design::read_image(path);
  if (r.width() != width || r.height() != height) {
    throw LoadError(path.string() + " is " + std::to_string(r.width()) + "x" + std::to_string(r.height()) +
                    ", expected " + std::to_string(width) + "x" + std::to_string(height));
  }
  return r;
}

// Square heatmaps: +1 inside a (2r+1)^2 box around each detected keypoint,
// -1 elsewhere and for undetected points.
Tensor pose_heatmaps(const fs::path& path, int height, int width) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  Tensor out({kVitonKeypoints, height, width}, -1.0);
  if (!j.contains("people") || !j["people"].is_array() || j["people"].empty()) return out;
  const auto& person = j["people"][0];
  const char* key = person.contains("pose_keypoints_2d") ? "pose_keypoints_2d" : "pose_keypoints";
  if (!person.contains(key) || !person[key].is_array()) throw LoadError(path.string() + ": no pose keypoints");
  const auto& kp = person[key];
  if (kp.size() < static_cast<std::size_t>(kVitonKeypoints) * 3) {
    throw LoadError(path.string() + ": expected " + std::to_string(kVitonKeypoints) + " keypoints");
  }
  const int r = 4;
  for (int k = 0; k < kVitonKeypoints; ++k) {
    const double x = kp[3 * k].get<double>(), y = kp[3 * k + 1].get<double>(), c = kp[3 * k + 2].get<double>();
    if (c <= 0) continue;
    const int cx = static_cast<int>(x), cy = static_cast<int>(y);
    for (int yy = std::max(0, cy - r); yy <= std::min(height - 1, cy + r); ++yy)
      for (int xx = std::max(0, cx - r); xx <= std::min(width - 1, cx + r); ++xx) out.at(k, yy, xx) = 1.0;
  }
  return out;
}

}  // namespace

std::vector<PairEntry> parse_pair_list(const std::string& text, const std::string& source) {
  std::vector<PairEntry> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (a[0] == '#') continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw ParseError(source + ":" + std::to_string(number) + ": expected '<person> <cloth>'", number);
    }
    out.push_back({a, b});
  }
  return out;
}

DatasetSplit load_viton(const fs::path& root, Split split) {
  const fs::path list = root / (to_string(split) + "_pairs.txt");
  if (!fs::exists(list)) throw LoadError("missing pair list " + list.string());
  DatasetSplit ds;
  ds.root = root;
  ds.split = split;
  ds.height = kVitonHeight;
  ds.width = kVitonWidth;
  ds.pose_channels = kVitonKeypoints;
  ds.pairs = parse_pair_list(read_text_file(list), list.string());
  const fs::path dir = root / to_string(split);
  for (const PairEntry& p : ds.pairs) {
    for (const fs::path& f : {person_path(dir, p), cloth_path(dir, p), parse_path(dir, p), pose_path(dir, p)}) {
      if (!fs::exists(f)) throw LoadError("missing file " + f.string());
    }
  }
  const fs::path other = root / (to_string(split == Split::kTrain ? Split::kTest : Split::kTrain) + "_pairs.txt");
  if (fs::exists(other)) {
    std::set<std::string> mine;
    for (const PairEntry& p : ds.pairs) mine.insert(p.person);
    for (const PairEntry& p : parse_pair_list(read_text_file(other), other.string())) {
      if (mine.count(p.person)) throw LoadError("person " + p.person + " appears in both train and test pair lists");
    }
  }
  return ds;
}

tryon::TryOnSample DatasetSplit::load(std::size_t index) const {
  if (index >= size()) throw NotFoundError("sample index " + std::to_string(index) + " out of range");
  if (in_memory()) return samples[index];
  const PairEntry& p = pairs[index];
  const fs::path dir = root / to_string(split);
  Raster person = read_sized(person_path(dir, p), width, height);
  Raster cloth = read_sized(cloth_path(dir, p), width, height);
  const fs::path parse_file = parse_path(dir, p);
  Raster parse = design::read_label_map(parse_file);
  if (parse.width() != width || parse.height() != height) throw LoadError(parse_file.string() + " has the wrong size");

  tryon::TryOnSample s;
  s.cloth = tryon::raster_to_tensor(cloth);
  s.person = tryon::raster_to_tensor(person);
  s.ground_truth = s.person;
  Tensor mask({1, height, width});
  Raster agnostic = person;
  if (agnostic.channels() == 4) agnostic = Raster(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool garment = is_garment_label(parse.at(x, y, 0));
      mask.at(0, y, x) = garment ? 1.0 : 0.0;
      for (int c = 0; c < 3; ++c) agnostic.at(x, y, c) = garment ? tryon::kAgnosticFill : person.at(x, y, c);
    }
  }
  s.agnostic = tryon::raster_to_tensor(agnostic);
  s.garment_mask = std::move(mask);
  s.pose = pose_heatmaps(pose_path(dir, p), height, width);
  return s;
}

// --- toy data ----------------------------------------------------------------

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

void fill_rect(Raster& img, const Rect& rect, Rgb color) {
  for (int y = std::max(0, rect.y); y < std::min(img.height(), rect.y + rect.h); ++y) {
    for (int x = std::max(0, rect.x); x < std::min(img.width(), rect.x + rect.w); ++x) {
      img.at(x, y, 0) = color.r;
      img.at(x, y, 1) = color.g;
      img.at(x, y, 2) = color.b;
    }
  }
}

void fill_disc(Raster& img, int cx, int cy, int radius, Rgb color) {
  for (int y = cy - radius; y <= cy + radius; ++y) {
    for (int x = cx - radius; x <= cx + radius; ++x) {
      if (!img.contains(x, y) || (x - cx) * (x - cx) + (y - cy) * (y - cy) > radius * radius) continue;
      img.at(x, y, 0) = color.r;
      img.at(x, y, 1) = color.g;
      img.at(x, y, 2) = color.b;
    }
  }
}

void mark(Tensor& pose, int channel, int cx, int cy) {
  const int r = 2;
  for (int y = std::max(0, cy - r); y <= std::min(pose.height() - 1, cy + r); ++y)
    for (int x = std::max(0, cx - r); x <= std::min(pose.width() - 1, cx + r); ++x) pose.at(channel, y, x) = 1.0;
}

int uniform_int(nn::Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

Rgb random_color(nn::Rng& rng, int lo, int hi) {
  return {static_cast<std::uint8_t>(uniform_int(rng, lo, hi)), static_cast<std::uint8_t>(uniform_int(rng, lo, hi)),
          static_cast<std::uint8_t>(uniform_int(rng, lo, hi))};
}

}  // namespace

DatasetSplit make_toy_dataset(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("toy dataset needs n >= 1", {{"n", std::to_string(n)}});
  const int size = kToySize;
  nn::Rng rng(seed);
  DatasetSplit ds;
  ds.root = "toy";
  ds.height = size;
  ds.width = size;
  ds.pose_channels = kToyPoseChannels;
  for (int i = 0; i < n; ++i) {
    const Rgb stripe_a = random_color(rng, 30, 225);
    const Rgb stripe_b = random_color(rng, 30, 225);
    const int period = uniform_int(rng, 4, 8);
    const bool vertical = rng.next() % 2 == 0;
    const Rgb background = random_color(rng, 190, 235);
    const Rgb skin{224, 172, 140};
    const Rgb pants = random_color(rng, 20, 80);

    const Rect cloth_rect{16, 12, 32, 40};
    Raster cloth(size, size, 3, 255);
    for (int y = cloth_rect.y; y < cloth_rect.y + cloth_rect.h; ++y) {
      for (int x = cloth_rect.x; x < cloth_rect.x + cloth_rect.w; ++x) {
        const int t = vertical ? x - cloth_rect.x : y - cloth_rect.y;
        fill_rect(cloth, {x, y, 1, 1}, (t / period) % 2 == 0 ? stripe_a : stripe_b);
      }
    }

    const Rect torso{20 + uniform_int(rng, -3, 3), 20 + uniform_int(rng, -2, 2), 24 + uniform_int(rng, -2, 2),
                     26 + uniform_int(rng, -2, 2)};
    const int cx = torso.x + torso.w / 2;
    Raster body(size, size, 3);
    fill_rect(body, {0, 0, size, size}, background);
    fill_disc(body, cx, torso.y - 7, 5, skin);
    fill_rect(body, {cx - 2, torso.y - 3, 4, 3}, skin);                      // neck
    fill_rect(body, {torso.x - 4, torso.y + 1, 4, torso.h - 4}, skin);        // left arm
    fill_rect(body, {torso.x + torso.w, torso.y + 1, 4, torso.h - 4}, skin);  // right arm
    fill_rect(body, {torso.x + 2, torso.y + torso.h, 8, size - torso.y - torso.h}, pants);
    fill_rect(body, {torso.x + torso.w - 10, torso.y + torso.h, 8, size - torso.y - torso.h}, pants);

    Raster wearing = body;
    for (int y = torso.y; y < torso.y + torso.h; ++y) {
      for (int x = torso.x; x < torso.x + torso.w; ++x) {
        const int sx = cloth_rect.x + (x - torso.x) * cloth_rect.w / torso.w;
        const int sy = cloth_rect.y + (y - torso.y) * cloth_rect.h / torso.h;
        for (int c = 0; c < 3; ++c) wearing.at(x, y, c) = cloth.at(sx, sy, c);
      }
    }
    Raster agnostic = wearing;
    fill_rect(agnostic, torso, {tryon::kAgnosticFill, tryon::kAgnosticFill, tryon::kAgnosticFill});

    Tensor pose({kToyPoseChannels, size, size}, -1.0);
    mark(pose, 0, cx, torso.y - 7);                                  // head
    mark(pose, 1, torso.x, torso.y);                                 // shoulders
    mark(pose, 1, torso.x + torso.w - 1, torso.y);
    mark(pose, 1, torso.x - 2, torso.y + torso.h - 4);               // hands
    mark(pose, 1, torso.x + torso.w + 1, torso.y + torso.h - 4);
    mark(pose, 2, torso.x + 2, torso.y + torso.h - 1);               // hips
    mark(pose, 2, torso.x + torso.w - 3, torso.y + torso.h - 1);

    Tensor mask({1, size, size});
    for (int y = torso.y; y < torso.y + torso.h; ++y)
      for (int x = torso.x; x < torso.x + torso.w; ++x) mask.at(0, y, x) = 1.0;

    tryon::TryOnSample s;
    s.cloth = tryon::raster_to_tensor(cloth);
    s.person = tryon::raster_to_tensor(wearing);
    s.pose = std::move(pose);
    s.agnostic = tryon::raster_to_tensor(agnostic);
    s.ground_truth = s.person;
    s.garment_mask = std::move(mask);
    ds.samples.push_back(std::move(s));
    ds.toy_layouts.push_back({cloth_rect, torso, std::move(body), std::move(cloth)});
    ds.pairs.push_back({"toy_" + std::to_string(i), "toy_" + std::to_string(i)});
  }
  return ds;
}

}  // namespace mycloth::train
