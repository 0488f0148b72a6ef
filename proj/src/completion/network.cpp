#include "hspn/completion/network.hpp"

#include <numeric>
#include <stdexcept>

#include "hspn/geometry/emd.hpp"
#include "hspn/geometry/metrics.hpp"
#include "hspn/kernels/kernels.hpp"

namespace hspn {

namespace {

Mat with_coords(const FeaturedCloud& fc) {
  Mat out(fc.size(), 3 + fc.width());
  for (int i = 0; i < fc.size(); ++i) {
    double* row = out.row(i);
    for (int k = 0; k < 3; ++k) row[k] = fc.points.xyz[3 * i + k];
    for (int k = 0; k < fc.width(); ++k) row[3 + k] = fc.features(i, k);
  }
  return out;
}

Mat reshape(const Mat& m, int rows, int cols) {
  Mat out(rows, cols);
  out.d = m.d;
  return out;
}

}  // namespace

void CompletionNet::init(const CompletionConfig& config, Rng& rng) {
  config_ = config;
  sa1_.init("completion.sa1", 0, config.sa1, false, rng);
  sa2_.init("completion.sa2", config.sa1.mlp_widths.back(), config.sa2, false, rng);
  GroupingSpec g3;
  g3.mlp_widths = config.sa3_widths;
  sa3_.init("completion.sa3", config.sa2.mlp_widths.back(), g3, true, rng);
  sa1_.canonical_seed = true;
  sa2_.canonical_seed = true;

  const int lat = config.latent_width();
  const int q2w = 3 + config.sa2.mlp_widths.back();
  const int q1w = 3 + config.sa1.mlp_widths.back();
  agb1_.init("completion.agb1", lat, q2w, config.d_att, rng);
  agb2_.init("completion.agb2", config.dec1_width, q1w, config.d_att, rng);
  agb3_.init("completion.agb3", config.dec2_width, config.dec2_width,
             config.d_att, rng);

  expand1_.init("completion.expand1", lat, config.dec1_points * config.dec1_width, rng);
  expand2_.init("completion.expand2", config.dec1_width,
                config.dec2_factor * config.dec2_width, rng);
  expand3_.init("completion.expand3", config.dec2_width,
                config.dec3_factor * config.dec3_width, rng);
  project_.init("completion.project", config.dec3_width, 3, rng);
}

void CompletionNet::params(nn::ParamRefs& out) {
  sa1_.params(out);
  sa2_.params(out);
  sa3_.params(out);
  agb1_.params(out);
  agb2_.params(out);
  agb3_.params(out);
  expand1_.params(out);
  expand2_.params(out);
  expand3_.params(out);
  project_.params(out);
}

EncodeResult CompletionNet::encode_hierarchy(const PointCloud& partial,
                                             Memo* memo) const {
  if (partial.empty())
    throw std::invalid_argument("encode_hierarchy: empty input");
  Memo local;
  Memo& m = memo ? *memo : local;

  FeaturedCloud in{partial, Mat(partial.size(), 0)};
  m.s1 = sa1_.forward(in, &m.sa1);
  m.s2 = sa2_.forward(m.s1, &m.sa2);
  m.s3 = sa3_.forward(m.s2, &m.sa3);

  EncodeResult res;
  res.global.assign(m.s3.features.d.begin(), m.s3.features.d.end());
  res.skips.push_back({1, m.s1});
  res.skips.push_back({2, m.s2});
  return res;
}

Mat CompletionNet::decode(Memo& m) const {
  const auto& cfg = config_;
  m.p0 = m.s3.features;  // 1 x latent

  Mat p = m.p0;
  if (cfg.use_cross_agb) {
    m.q2 = with_coords(m.s2);
    m.agb1_out = agb1_.forward(p, &m.q2, &m.agb1);
    p = m.agb1_out;
  }
  m.e1_pre = reshape(expand1_.forward(p), cfg.dec1_points, cfg.dec1_width);
  m.b1 = nn::lrelu(m.e1_pre);

  Mat p2 = m.b1;
  if (cfg.use_cross_agb) {
    m.q1 = with_coords(m.s1);
    m.agb2_out = agb2_.forward(p2, &m.q1, &m.agb2);
    p2 = m.agb2_out;
  }
  m.e2_pre = reshape(expand2_.forward(p2), cfg.dec1_points * cfg.dec2_factor,
                     cfg.dec2_width);
  m.b2 = nn::lrelu(m.e2_pre);

  Mat p3 = m.b2;
  if (cfg.use_self_agb) {
    m.agb3_out = agb3_.forward(p3, nullptr, &m.agb3);
    p3 = m.agb3_out;
  }
  m.e3_pre = reshape(expand3_.forward(p3),
                     cfg.dec1_points * cfg.dec2_factor * cfg.dec3_factor,
                     cfg.dec3_width);
  m.b3 = nn::lrelu(m.e3_pre);

  return project_.forward(m.b3);
}

PointCloud CompletionNet::complete(const PointCloud& partial, Memo* memo) const {
  Memo local;
  Memo& m = memo ? *memo : local;
  encode_hierarchy(partial, &m);
  const Mat out = decode(m);
  PointCloud cloud(out.rows);
  cloud.xyz = out.d;
  return cloud;
}

void CompletionNet::backward(const Memo& memo, const Mat& dcloud) {
  const auto& cfg = config_;

  Mat d = project_.backward(memo.b3, dcloud);
  d = nn::lrelu_backward(memo.e3_pre, d);
  // child rows fold back onto their parent points through the expansion
  const int n3 = cfg.dec1_points * cfg.dec2_factor;
  const Mat& p3_in = cfg.use_self_agb ? memo.agb3_out : memo.b2;
  Mat dp3 = expand3_.backward(p3_in, reshape(d, n3, cfg.dec3_factor * cfg.dec3_width));

  Mat db2;
  if (cfg.use_self_agb) {
    auto g = agb3_.backward(memo.agb3, dp3, true);
    db2 = std::move(g.dp);
  } else {
    db2 = std::move(dp3);
  }

  Mat d2 = nn::lrelu_backward(memo.e2_pre, db2);
  const Mat& p2_in = cfg.use_cross_agb ? memo.agb2_out : memo.b1;
  Mat dp2 = expand2_.backward(
      p2_in, reshape(d2, cfg.dec1_points, cfg.dec2_factor * cfg.dec2_width));

  Mat ds1_feat(memo.s1.size(), memo.s1.width());
  Mat ds2_feat(memo.s2.size(), memo.s2.width());

  Mat db1;
  if (cfg.use_cross_agb) {
    auto g = agb2_.backward(memo.agb2, dp2, false);
    db1 = std::move(g.dp);
    // the xyz part of the skip is data, only features carry gradient
    for (int i = 0; i < memo.s1.size(); ++i)
      for (int k = 0; k < memo.s1.width(); ++k) ds1_feat(i, k) += g.dq(i, 3 + k);
  } else {
    db1 = std::move(dp2);
  }

  Mat d1 = nn::lrelu_backward(memo.e1_pre, db1);
  const Mat& p1_in = cfg.use_cross_agb ? memo.agb1_out : memo.p0;
  Mat dp0 = expand1_.backward(p1_in, reshape(d1, 1, cfg.dec1_points * cfg.dec1_width));

  if (cfg.use_cross_agb) {
    auto g = agb1_.backward(memo.agb1, dp0, false);
    dp0 = std::move(g.dp);
    for (int i = 0; i < memo.s2.size(); ++i)
      for (int k = 0; k < memo.s2.width(); ++k) ds2_feat(i, k) += g.dq(i, 3 + k);
  }

  sa3_.backward(memo.sa3, dp0, &ds2_feat, nullptr);
  sa2_.backward(memo.sa2, ds2_feat, &ds1_feat, nullptr);
  sa1_.backward(memo.sa1, ds1_feat, nullptr, nullptr);
}

double loss_completion(const PointCloud& pred, const PointCloud& gt,
                       double lambda3, double lambda4, Rng* rng) {
  const double cd = chamfer(pred, gt);
  double emd = 0.0;
  if (lambda4 != 0.0) {
    if (pred.size() == gt.size()) {
      emd = emd_approx(pred, gt);
    } else {
      if (!rng)
        throw std::invalid_argument(
            "loss_completion: unequal sizes need an rng for the subsample");
      const int m = std::min(pred.size(), gt.size());
      const bool pred_bigger = pred.size() > gt.size();
      const PointCloud* big = pred_bigger ? &pred : &gt;
      const PointCloud* small = pred_bigger ? &gt : &pred;
      std::vector<int> idx(big->size());
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng->uniform_index(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      PointCloud sub(m);
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < 3; ++k) sub.xyz[3 * i + k] = big->xyz[3 * idx[i] + k];
      emd = emd_approx(*small, sub);
    }
  }
  return lambda3 * cd + lambda4 * emd;
}

CompletionLoss loss_completion_grad(const PointCloud& pred, const PointCloud& gt,
                                    double lambda3, double lambda4,
                                    int emd_points, Rng& rng, Mat* dpred) {
  CompletionLoss out;
  Mat gcd(pred.size(), 3);
  out.cd = chamfer_grad(pred, gt, &gcd, nullptr);
  if (dpred)
    for (size_t i = 0; i < gcd.d.size(); ++i) dpred->d[i] += lambda3 * gcd.d[i];

  if (lambda4 != 0.0) {
    const int target = std::min(pred.size(), gt.size());
    const int m = std::min(target, emd_points);
    auto pick = [&](const PointCloud& c) {
      std::vector<int> idx(c.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(m);
      return idx;
    };
    const std::vector<int> pi = pick(pred);
    const std::vector<int> gi = pick(gt);
    PointCloud ps(m), gs(m);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < 3; ++k) {
        ps.xyz[3 * i + k] = pred.xyz[3 * pi[i] + k];
        gs.xyz[3 * i + k] = gt.xyz[3 * gi[i] + k];
      }
    Mat gemd(m, 3);
    const double sum_m = emd_approx_grad(ps, gs, &gemd, nullptr);
    const double scale = static_cast<double>(target) / m;
    out.emd = sum_m * scale;
    if (dpred)
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < 3; ++k)
          (*dpred)(pi[i], k) += lambda4 * scale * gemd(i, k);
  }
  out.loss = lambda3 * out.cd + lambda4 * out.emd;
  return out;
}

}  // namespace hspn
