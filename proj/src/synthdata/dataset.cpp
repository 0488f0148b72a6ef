#include "hspn/synthdata/dataset.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "hspn/core/rng.hpp"
#include "hspn/io/container.hpp"

namespace hspn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

SyntheticSample make_sample(const DatasetConfig& cfg, int index) {
  SyntheticSample s;
  char idbuf[16];
  std::snprintf(idbuf, sizeof idbuf, "s%06d", index);
  s.id = idbuf;

  const uint64_t sample_seed = Rng::splitmix64(cfg.seed ^ Rng::splitmix64(index + 1));
  Rng rng(sample_seed);

  s.gt = make_shape(sample_seed, cfg.perturb_amp);

  s.occ.seed = sample_seed;
  const double pick = rng.uniform();
  s.occ.mode = pick < 1.0 / 3 ? OcclusionSpec::Mode::half_space
               : pick < 2.0 / 3 ? OcclusionSpec::Mode::sphere
                                : OcclusionSpec::Mode::rect;
  s.occ.fraction = rng.uniform(cfg.min_fraction, cfg.max_fraction);

  OcclusionResult occ = make_occlusion(s.gt, s.occ);
  s.partial = std::move(occ.partial);
  s.visible = std::move(occ.visible);

  s.image = render_slice(s.gt, s.visible, 2, 0.0);

  // 90/10 split by seed hash
  s.split = Rng::splitmix64(sample_seed ^ 0x5eed5911ull) % 10 == 0 ? "test" : "train";
  return s;
}

std::vector<SyntheticSample> make_dataset(const DatasetConfig& cfg) {
  std::vector<SyntheticSample> out;
  out.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) out.push_back(make_sample(cfg, i));
  return out;
}

void write_dataset(const std::vector<SyntheticSample>& samples,
                   const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl", std::ios::trunc);
  if (!manifest)
    throw io::FormatError("write_dataset: cannot open manifest in '" + dir + "'");

  for (const auto& s : samples) {
    io::Container c;
    c.put_f32_from_f64("image", s.image.data(), {91, 109});
    c.put_f32_from_f64("gt", s.gt.xyz.data(), {static_cast<uint64_t>(s.gt.size()), 3});
    c.put_f32_from_f64("partial", s.partial.xyz.data(),
                       {static_cast<uint64_t>(s.partial.size()), 3});
    c.put_u8("visible", s.visible.data(), {s.visible.size()});
    const std::string file = s.id + ".hspn";
    c.write((fs::path(dir) / file).string());

    ordered_json row;
    row["id"] = s.id;
    row["seed"] = s.occ.seed;
    row["mode"] = occlusion_mode_name(s.occ.mode);
    row["fraction"] = s.occ.fraction;
    row["split"] = s.split;
    row["file"] = file;
    manifest << row.dump() << "\n";
  }
}

std::vector<SyntheticSample> read_dataset(const std::string& dir) {
  std::ifstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest)
    throw io::FormatError("read_dataset: no manifest.jsonl in '" + dir + "'");

  std::vector<SyntheticSample> out;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    ordered_json row;
    try {
      row = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw io::FormatError(std::string("read_dataset: bad manifest row: ") + e.what());
    }
    SyntheticSample s;
    s.id = row.at("id").get<std::string>();
    s.occ.seed = row.at("seed").get<uint64_t>();
    s.occ.mode = occlusion_mode_from_name(row.at("mode").get<std::string>());
    s.occ.fraction = row.at("fraction").get<double>();
    s.split = row.at("split").get<std::string>();
    const std::string file = row.at("file").get<std::string>();

    const fs::path path = fs::path(dir) / file;
    if (!fs::exists(path))
      throw io::FormatError("read_dataset: sample '" + s.id + "' missing file " +
                            path.string());
    io::Container c;
    try {
      c = io::Container::read(path.string());
    } catch (const io::FormatError& e) {
      throw io::FormatError("read_dataset: sample '" + s.id + "': " + e.what());
    }

    const auto img = c.get_f32_as_f64("image");
    s.image.resize(91 * 109, 1);
    s.image.d = img;
    s.gt.xyz = c.get_f32_as_f64("gt");
    s.partial.xyz = c.get_f32_as_f64("partial");
    s.visible = c.get_u8("visible");
    out.push_back(std::move(s));
  }
  return out;
}

Mat render_slice_stack(const PointCloud& gt, const std::vector<uint8_t>& visible,
                       int k) {
  Mat stack(91 * 109, k);
  for (int s = 0; s < k; ++s) {
    const double offset = k == 1 ? 0.0 : -0.3 + 0.6 * s / (k - 1);
    const Mat img = render_slice(gt, visible, 2, offset);
    for (int p = 0; p < stack.rows; ++p) stack(p, s) = img.d[p];
  }
  return stack;
}

}  // namespace hspn
