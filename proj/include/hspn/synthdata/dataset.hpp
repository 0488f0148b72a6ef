#pragma once

#include <string>
#include <vector>

#include "hspn/synthdata/shapes.hpp"

namespace hspn {

struct SyntheticSample {
  std::string id;
  Mat image;                     // (91*109) x 1, values in [0,1]
  PointCloud gt;                 // 2048 points, normalized
  PointCloud partial;            // visible subset of gt
  std::vector<uint8_t> visible;  // per-gt-point flag
  OcclusionSpec occ;
  std::string split;  // "train" | "test"
};

struct DatasetConfig {
  int count = 200;
  uint64_t seed = 0;
  double min_fraction = 0.2;
  double max_fraction = 0.4;
  double perturb_amp = kDefaultPerturbAmp;
};

/// Pure function of (config.seed, index): shape, occlusion, rendered slice
/// and the 90/10 split tag.
SyntheticSample make_sample(const DatasetConfig& cfg, int index);

std::vector<SyntheticSample> make_dataset(const DatasetConfig& cfg);

/// One container file per sample plus a JSON-lines manifest in dir.
void write_dataset(const std::vector<SyntheticSample>& samples,
                   const std::string& dir);

/// Reads every manifest row; missing files and malformed headers raise
/// errors naming the offending id.
std::vector<SyntheticSample> read_dataset(const std::string& dir);

/// Extra slice stack for multi-slice runs: k planes spread along the z
/// axis, pixel-major (91*109) x k.
Mat render_slice_stack(const PointCloud& gt, const std::vector<uint8_t>& visible,
                       int k);

}  // namespace hspn
