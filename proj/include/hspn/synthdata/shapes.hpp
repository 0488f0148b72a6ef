#pragma once

#include <cstdint>
#include <string>

#include "hspn/core/mat.hpp"
#include "hspn/geometry/point_cloud.hpp"

namespace hspn {

inline constexpr double kDefaultPerturbAmp = 0.12;

struct ShapeInfo {
  PointCloud raw;           // before normalization
  double radii[3] = {1, 1, 1};
};

/// 2048 points sampled on a bumpy ellipsoid: a brain-ish aspect ratio with a
/// low-order spherical-harmonic radial perturbation. Normalized; pure
/// function of (seed, perturb_amp). Coordinates are snapped through f32 so
/// dataset round-trips are bit-exact.
PointCloud make_shape(uint64_t seed, double perturb_amp = kDefaultPerturbAmp,
                      ShapeInfo* info = nullptr);

struct OcclusionSpec {
  enum class Mode { none, half_space, sphere, rect };
  Mode mode = Mode::half_space;
  double fraction = 0.3;  // target removed fraction
  uint64_t seed = 0;
};

const char* occlusion_mode_name(OcclusionSpec::Mode m);
OcclusionSpec::Mode occlusion_mode_from_name(const std::string& s);

struct OcclusionResult {
  PointCloud partial;            // visible points, original order
  std::vector<uint8_t> visible;  // one flag per gt point
  int removed = 0;
};

/// Cut the cloud by the spec's mode; the removed count is the rounded
/// target so the achieved fraction is exact to 1/(2N).
OcclusionResult make_occlusion(const PointCloud& gt, const OcclusionSpec& occ);

/// Soft silhouette of the visible points inside a slab around
/// plane (axis, offset), rasterized to 91 x 109 in [0,1]. Throws
/// std::invalid_argument when the slab is empty.
Mat render_slice(const PointCloud& gt, const std::vector<uint8_t>& visible,
                 int axis, double offset);

/// Convenience: occlusion derived from the spec, then rendered.
Mat render_slice(const PointCloud& gt, const OcclusionSpec& occ, int axis,
                 double offset);

}  // namespace hspn
