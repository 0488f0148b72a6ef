#include "hspn/synthdata/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hspn/core/rng.hpp"

namespace hspn {

namespace {

constexpr int kShapePoints = 2048;
constexpr int kImH = 91;
constexpr int kImW = 109;

/// Real spherical harmonics for l = 1..3 evaluated on a unit direction,
/// without the normalization constants (absorbed into the coefficients).
int sh_basis(const double* u, double* out) {
  const double x = u[0], y = u[1], z = u[2];
  int k = 0;
  // l = 1
  out[k++] = x;
  out[k++] = y;
  out[k++] = z;
  // l = 2
  out[k++] = x * y;
  out[k++] = y * z;
  out[k++] = x * z;
  out[k++] = 3 * z * z - 1;
  out[k++] = x * x - y * y;
  // l = 3
  out[k++] = (5 * z * z - 1) * x;
  out[k++] = (5 * z * z - 1) * y;
  out[k++] = (5 * z * z - 3) * z;
  out[k++] = (x * x - y * y) * z;
  out[k++] = x * y * z;
  out[k++] = (x * x - 3 * y * y) * x;
  out[k++] = (3 * x * x - y * y) * y;
  return k;
}

double snap_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

PointCloud make_shape(uint64_t seed, double perturb_amp, ShapeInfo* info) {
  Rng rng = Rng::derive(seed, 0x5348u);  // shape stream

  const double radii[3] = {1.0, 0.82 * rng.uniform(0.92, 1.08),
                           0.74 * rng.uniform(0.92, 1.08)};
  double coeff[15];
  for (auto& c : coeff) c = rng.normal(0.0, 0.5);

  PointCloud raw(kShapePoints);
  double basis[15];
  for (int i = 0; i < kShapePoints; ++i) {
    double u[3];
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        u[k] = rng.normal();
        n2 += u[k] * u[k];
      }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (int k = 0; k < 3; ++k) u[k] *= inv;

    double bump = 0.0;
    const int nb = sh_basis(u, basis);
    for (int k = 0; k < nb; ++k) bump += coeff[k] * basis[k];
    const double r = 1.0 + perturb_amp * bump;

    for (int k = 0; k < 3; ++k) raw.xyz[3 * i + k] = r * radii[k] * u[k];
  }

  if (info) {
    info->raw = raw;
    for (int k = 0; k < 3; ++k) info->radii[k] = radii[k];
  }

  PointCloud out = normalize(raw).cloud;
  for (auto& v : out.xyz) v = snap_f32(v);
  return out;
}

const char* occlusion_mode_name(OcclusionSpec::Mode m) {
  switch (m) {
    case OcclusionSpec::Mode::none: return "none";
    case OcclusionSpec::Mode::half_space: return "half-space-cut";
    case OcclusionSpec::Mode::sphere: return "sphere-cut";
    case OcclusionSpec::Mode::rect: return "rect-mask";
  }
  return "?";
}

OcclusionSpec::Mode occlusion_mode_from_name(const std::string& s) {
  if (s == "none") return OcclusionSpec::Mode::none;
  if (s == "half-space-cut") return OcclusionSpec::Mode::half_space;
  if (s == "sphere-cut") return OcclusionSpec::Mode::sphere;
  if (s == "rect-mask") return OcclusionSpec::Mode::rect;
  throw std::invalid_argument("unknown occlusion mode '" + s + "'");
}

OcclusionResult make_occlusion(const PointCloud& gt, const OcclusionSpec& occ) {
  const int n = gt.size();
  if (n == 0) throw std::invalid_argument("make_occlusion: empty cloud");
  if (!(occ.fraction >= 0.0 && occ.fraction < 1.0))
    throw std::invalid_argument("make_occlusion: fraction outside [0,1)");

  OcclusionResult res;
  res.visible.assign(n, 1);

  const int remove = occ.mode == OcclusionSpec::Mode::none
                         ? 0
                         : static_cast<int>(std::lround(occ.fraction * n));
  res.removed = remove;
  if (remove > 0) {
    Rng rng = Rng::derive(occ.seed, 0x0ccu);  // occlusion stream

    // score each point; the `remove` highest-scoring points are cut
    std::vector<double> score(n, 0.0);
    switch (occ.mode) {
      case OcclusionSpec::Mode::half_space: {
        double dir[3];
        double n2 = 0.0;
        for (auto& d : dir) {
          d = rng.normal();
          n2 += d * d;
        }
        for (auto& d : dir) d /= std::sqrt(n2);
        for (int i = 0; i < n; ++i)
          score[i] = gt.xyz[3 * i] * dir[0] + gt.xyz[3 * i + 1] * dir[1] +
                     gt.xyz[3 * i + 2] * dir[2];
        break;
      }
      case OcclusionSpec::Mode::sphere: {
        const int c = static_cast<int>(rng.uniform_index(n));
        for (int i = 0; i < n; ++i) {
          double d2 = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double d = gt.xyz[3 * i + k] - gt.xyz[3 * c + k];
            d2 += d * d;
          }
          score[i] = -d2;  // closest to the center go first
        }
        break;
      }
      case OcclusionSpec::Mode::rect: {
        const int c = static_cast<int>(rng.uniform_index(n));
        double w[3];
        for (auto& v : w) v = rng.uniform(0.5, 1.5);
        for (int i = 0; i < n; ++i) {
          double m = 0.0;
          for (int k = 0; k < 3; ++k)
            m = std::max(m, std::abs(gt.xyz[3 * i + k] - gt.xyz[3 * c + k]) / w[k]);
          score[i] = -m;
        }
        break;
      }
      case OcclusionSpec::Mode::none: break;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    for (int r = 0; r < remove; ++r) res.visible[order[r]] = 0;
  }

  for (int i = 0; i < n; ++i)
    if (res.visible[i])
      res.partial.push_back(gt.xyz[3 * i], gt.xyz[3 * i + 1], gt.xyz[3 * i + 2]);
  return res;
}

Mat render_slice(const PointCloud& gt, const std::vector<uint8_t>& visible,
                 int axis, double offset) {
  const int n = gt.size();
  if (axis < 0 || axis > 2) throw std::invalid_argument("render_slice: bad axis");
  if (static_cast<int>(visible.size()) != n)
    throw std::invalid_argument("render_slice: mask size mismatch");

  double lo = gt.xyz[axis], hi = gt.xyz[axis];
  for (int i = 0; i < n; ++i) {
    lo = std::min(lo, gt.xyz[3 * i + axis]);
    hi = std::max(hi, gt.xyz[3 * i + axis]);
  }
  const double half_thick = 0.05 * (hi - lo);

  const int u_axis = (axis + 1) % 3;
  const int v_axis = (axis + 2) % 3;

  // fixed [-1.1, 1.1] window: clouds are normalized to the unit ball
  const double span = 2.2;
  const double u0 = -1.1, v0 = -1.1;

  Mat img(kImH * kImW, 1);
  const double sigma = 1.5;  // pixels
  const int win = 5;
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!visible[i]) continue;
    if (std::abs(gt.xyz[3 * i + axis] - offset) > half_thick) continue;
    any = true;
    const double px = (gt.xyz[3 * i + u_axis] - u0) / span * (kImW - 1);
    const double py = (gt.xyz[3 * i + v_axis] - v0) / span * (kImH - 1);
    const int cx = static_cast<int>(std::lround(px));
    const int cy = static_cast<int>(std::lround(py));
    for (int dy = -win; dy <= win; ++dy) {
      for (int dx = -win; dx <= win; ++dx) {
        const int x = cx + dx, y = cy + dy;
        if (x < 0 || x >= kImW || y < 0 || y >= kImH) continue;
        const double ddx = px - x, ddy = py - y;
        double v = std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * sigma * sigma));
        if (v < 1e-4) v = 0.0;
        double& cell = img.d[static_cast<size_t>(y) * kImW + x];
        // max keeps the splat order-independent
        cell = std::max(cell, v);
      }
    }
  }
  if (!any)
    throw std::invalid_argument("render_slice: slab does not intersect the shape");

  for (auto& v : img.d) v = snap_f32(v);
  return img;
}

Mat render_slice(const PointCloud& gt, const OcclusionSpec& occ, int axis,
                 double offset) {
  const OcclusionResult res = make_occlusion(gt, occ);
  return render_slice(gt, res.visible, axis, offset);
}

}  // namespace hspn
