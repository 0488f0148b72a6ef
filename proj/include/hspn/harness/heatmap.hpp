#pragma once

#include <array>
#include <string>

#include "hspn/geometry/point_cloud.hpp"

namespace hspn {

struct HeatmapInfo {
  double p95 = 0.0;  // color ramp upper bound
  int count = 0;
};

/// ASCII PLY with per-vertex color: blue (zero error) ramping linearly to
/// red at the 95th percentile of the per-point error. A sidecar JSON at
/// path + ".json" records the ramp scale and the 1e-4 axis convention.
HeatmapInfo export_heatmap(const PointCloud& pred, const PointCloud& gt,
                           const std::string& path);

struct ParsedPly {
  PointCloud cloud;
  std::vector<std::array<int, 3>> rgb;
};

/// Reads back the files export_heatmap writes (round-trip checks).
ParsedPly parse_heatmap_ply(const std::string& path);

}  // namespace hspn
