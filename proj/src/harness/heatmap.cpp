#include "hspn/harness/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hspn/geometry/metrics.hpp"
#include "hspn/io/container.hpp"

namespace hspn {

HeatmapInfo export_heatmap(const PointCloud& pred, const PointCloud& gt,
                           const std::string& path) {
  const std::vector<double> errors = pc_to_pc_error(pred, gt);
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  // nearest-rank 95th percentile
  const size_t rank = static_cast<size_t>(std::ceil(0.95 * sorted.size()));
  const double p95 = sorted[std::min(sorted.size() - 1, rank > 0 ? rank - 1 : 0)];

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw io::FormatError("heatmap: cannot open '" + path + "'");
  f << "ply\nformat ascii 1.0\n";
  f << "element vertex " << pred.size() << "\n";
  f << "property double x\nproperty double y\nproperty double z\n";
  f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  f << "end_header\n";

  char buf[160];
  for (int i = 0; i < pred.size(); ++i) {
    const double t = p95 > 0.0 ? std::clamp(errors[i] / p95, 0.0, 1.0) : 0.0;
    const int r = static_cast<int>(std::lround(255.0 * t));
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d %d %d\n",
                  pred.xyz[3 * i], pred.xyz[3 * i + 1], pred.xyz[3 * i + 2], r,
                  0, 255 - r);
    f << buf;
  }
  f.close();

  {
    std::ofstream j(path + ".json", std::ios::trunc);
    std::snprintf(buf, sizeof buf,
                  "{\"error_scale_p95\":%.17g,\"axis_multiplier\":1e-4,"
                  "\"count\":%d}\n",
                  p95, pred.size());
    j << buf;
  }

  HeatmapInfo info;
  info.p95 = p95;
  info.count = pred.size();
  return info;
}

ParsedPly parse_heatmap_ply(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io::FormatError("heatmap: cannot open '" + path + "'");
  std::string line;
  int vertices = -1;
  while (std::getline(f, line)) {
    if (line.rfind("element vertex ", 0) == 0)
      vertices = std::stoi(line.substr(15));
    if (line == "end_header") break;
  }
  if (vertices < 0) throw io::FormatError("heatmap: malformed PLY header");

  ParsedPly out;
  out.cloud = PointCloud(vertices);
  out.rgb.resize(vertices);
  for (int i = 0; i < vertices; ++i) {
    if (!std::getline(f, line))
      throw io::FormatError("heatmap: truncated vertex list");
    double x, y, z;
    int r, g, b;
    if (std::sscanf(line.c_str(), "%lf %lf %lf %d %d %d", &x, &y, &z, &r, &g,
                    &b) != 6)
      throw io::FormatError("heatmap: bad vertex row");
    out.cloud.xyz[3 * i] = x;
    out.cloud.xyz[3 * i + 1] = y;
    out.cloud.xyz[3 * i + 2] = z;
    out.rgb[i] = {r, g, b};
  }
  return out;
}

}  // namespace hspn
