#include "hspn/sampling/set_abstraction.hpp"

#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

void SetAbstraction::init(const std::string& name, int in_width,
                          const GroupingSpec& spec, bool global, Rng& rng) {
  if (spec.mlp_widths.empty())
    throw std::invalid_argument("SetAbstraction: empty mlp_widths");
  spec_ = spec;
  global_ = global;
  mlp_.resize(spec.mlp_widths.size());
  int w = 3 + in_width;
  for (size_t l = 0; l < mlp_.size(); ++l) {
    mlp_[l].init(name + ".mlp" + std::to_string(l), w, spec.mlp_widths[l], rng);
    w = spec.mlp_widths[l];
  }
}

FeaturedCloud SetAbstraction::forward(const FeaturedCloud& in, Memo* memo) const {
  const int n = in.size();
  const int c_in = in.width();

  std::vector<int> centers;
  std::vector<std::vector<int>> groups;
  PointCloud center_pts;

  if (global_) {
    // single group anchored at the centroid, covering every point
    const auto cen = in.points.centroid();
    center_pts.push_back(cen[0], cen[1], cen[2]);
    GroupingSpec all = spec_;
    all.npoint = 1;
    all.radius = -1.0;
    all.kmax = n;
    groups = ball_query(center_pts, in.points, all);
    centers = {-1};
  } else {
    // small inputs (robustness runs) shrink the level instead of failing
    GroupingSpec eff = spec_;
    eff.npoint = std::min(spec_.npoint, n);
    eff.validate(n);
    const int seed = canonical_seed ? canonical_seed_index(in.points) : fps_seed;
    centers = farthest_point_sample(in.points, eff.npoint, seed);
    center_pts = PointCloud(eff.npoint);
    for (int c = 0; c < eff.npoint; ++c)
      for (int k = 0; k < 3; ++k) center_pts.xyz[3 * c + k] = in.points.xyz[3 * centers[c] + k];
    groups = ball_query(center_pts, in.points, eff);
  }

  const int ng = static_cast<int>(groups.size());
  const int kmax = static_cast<int>(groups[0].size());

  // stack all groups: rows are [rel xyz | point features]
  Mat stacked(ng * kmax, 3 + c_in);
  for (int g = 0; g < ng; ++g) {
    for (int k = 0; k < kmax; ++k) {
      const int i = groups[g][k];
      double* row = stacked.row(g * kmax + k);
      for (int d = 0; d < 3; ++d) row[d] = in.points.xyz[3 * i + d] - center_pts.xyz[3 * g + d];
      for (int d = 0; d < c_in; ++d) row[3 + d] = in.features(i, d);
    }
  }

  // shared per-point MLP with LeakyReLU between layers
  std::vector<Mat> pre;
  Mat cur = stacked;
  for (const auto& layer : mlp_) {
    pre.push_back(layer.forward(cur));
    cur = nn::lrelu(pre.back());
  }

  // max over each group's rows
  const int c_out = cur.cols;
  Mat features(ng, c_out);
  std::vector<std::vector<int>> argmax(ng);
  for (int g = 0; g < ng; ++g) {
    argmax[g].resize(c_out);
    kernels::colmax(cur.row(g * kmax), kmax, c_out, features.row(g),
                    argmax[g].data());
  }

  if (memo) {
    memo->centers = centers;
    memo->groups = groups;
    memo->stacked = std::move(stacked);
    memo->pre = std::move(pre);
    memo->argmax = std::move(argmax);
    memo->in_size = n;
    memo->in_width = c_in;
  }
  return FeaturedCloud(std::move(center_pts), std::move(features));
}

void SetAbstraction::backward(const Memo& memo, const Mat& dout, Mat* dfeat,
                              Mat* dcoord) {
  const int ng = static_cast<int>(memo.groups.size());
  const int kmax = static_cast<int>(memo.groups[0].size());
  const int c_out = dout.cols;

  // scatter pooled gradients back to the maximizing rows
  Mat dstack_top(ng * kmax, c_out);
  for (int g = 0; g < ng; ++g)
    for (int ch = 0; ch < c_out; ++ch)
      dstack_top(g * kmax + memo.argmax[g][ch], ch) += dout(g, ch);

  // reverse through the MLP
  Mat d = std::move(dstack_top);
  for (int l = static_cast<int>(mlp_.size()) - 1; l >= 0; --l) {
    d = nn::lrelu_backward(memo.pre[l], d);
    const Mat& input = l == 0 ? memo.stacked : nn::lrelu(memo.pre[l - 1]);
    d = mlp_[l].backward(input, d);
  }

  // split into coordinate and feature gradients
  if (dfeat && memo.in_width > 0 && (dfeat->rows != memo.in_size || dfeat->cols != memo.in_width))
    throw std::invalid_argument("SetAbstraction::backward: dfeat shape");
  for (int g = 0; g < ng; ++g) {
    const int center = memo.centers[g];
    for (int k = 0; k < kmax; ++k) {
      const int i = memo.groups[g][k];
      const double* row = d.row(g * kmax + k);
      if (dcoord) {
        for (int c = 0; c < 3; ++c) {
          (*dcoord)(i, c) += row[c];
          if (center >= 0) (*dcoord)(center, c) -= row[c];
          // global level: the anchor is the centroid, every point shares it
          else
            for (int j = 0; j < memo.in_size; ++j)
              (*dcoord)(j, c) -= row[c] / memo.in_size;
        }
      }
      if (dfeat)
        for (int c = 0; c < memo.in_width; ++c) (*dfeat)(i, c) += row[3 + c];
    }
  }
}

}  // namespace hspn
