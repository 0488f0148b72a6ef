#include "hspn/predictor/image_encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace hspn {

namespace {
constexpr int kConvCh[5] = {0, 16, 32, 64, 128};  // [0] replaced by in_slices
}

void ImageEncoder::init(int in_slices, Rng& rng) {
  if (in_slices < 1) throw std::invalid_argument("ImageEncoder: slices >= 1");
  in_slices_ = in_slices;
  int ch = in_slices;
  for (int s = 0; s < 4; ++s) {
    conv_[s].init("encoder.conv" + std::to_string(s), ch, kConvCh[s + 1], rng);
    ch = kConvCh[s + 1];
  }
  // 91x109 -> 46x55 -> 23x28 -> 12x14 -> 6x7
  const int flat = 6 * 7 * 128;
  fc_.init("encoder.fc", flat, 256, rng);
  head_.init("encoder.head", 256, 2 * kLatentDim, rng);
}

LatentCode ImageEncoder::encode(const Mat& images, Rng& rng, bool sample,
                                Memo* memo) const {
  if (images.rows != kSliceH * kSliceW || images.cols != in_slices_)
    throw std::invalid_argument("ImageEncoder: expected " +
                                std::to_string(kSliceH * kSliceW) + "x" +
                                std::to_string(in_slices_) + " image stack");
  for (double v : images.d)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("ImageEncoder: pixel outside [0,1]");

  nn::FeatureMap x(kSliceH, kSliceW, in_slices_);
  x.data = images;

  Memo local;
  Memo& m = memo ? *memo : local;
  m.input = x;
  m.pre.clear();

  nn::FeatureMap cur = x;
  for (int s = 0; s < 4; ++s) {
    m.pre.push_back(conv_[s].forward(cur));
    cur = m.pre.back();
    cur.data = nn::lrelu(cur.data);
  }

  m.flat.resize(1, static_cast<int>(cur.data.size()));
  for (size_t i = 0; i < cur.data.size(); ++i) m.flat.d[i] = cur.data.d[i];

  m.fc_pre = fc_.forward(m.flat);
  const Mat fc_act = nn::lrelu(m.fc_pre);
  m.head_out = head_.forward(fc_act);

  LatentCode code;
  code.mu.assign(kLatentDim, 0.0);
  code.log_var.assign(kLatentDim, 0.0);
  code.eps.assign(kLatentDim, 0.0);
  code.z.assign(kLatentDim, 0.0);
  for (int i = 0; i < kLatentDim; ++i) {
    code.mu[i] = m.head_out(0, i);
    code.log_var[i] = m.head_out(0, kLatentDim + i);
    code.eps[i] = sample ? rng.normal() : 0.0;
    code.z[i] = code.mu[i] + std::exp(0.5 * code.log_var[i]) * code.eps[i];
  }
  return code;
}

void ImageEncoder::backward(const Memo& memo, const Vec& dmu,
                            const Vec& dlog_var, Mat* dimage) {
  Mat dhead(1, 2 * kLatentDim);
  for (int i = 0; i < kLatentDim; ++i) {
    dhead(0, i) = dmu[i];
    dhead(0, kLatentDim + i) = dlog_var[i];
  }

  const Mat fc_act = nn::lrelu(memo.fc_pre);
  Mat d = head_.backward(fc_act, dhead);
  d = nn::lrelu_backward(memo.fc_pre, d);
  d = fc_.backward(memo.flat, d);

  // back through the conv stack
  nn::FeatureMap dmap(6, 7, 128);
  for (size_t i = 0; i < dmap.data.size(); ++i) dmap.data.d[i] = d.d[i];

  for (int s = 3; s >= 0; --s) {
    dmap.data = nn::lrelu_backward(memo.pre[s].data, dmap.data);
    nn::FeatureMap input = s == 0 ? memo.input : memo.pre[s - 1];
    if (s > 0) input.data = nn::lrelu(input.data);
    dmap = conv_[s].backward(input, dmap);
  }
  if (dimage) *dimage = dmap.data;
}

double kl_loss(const LatentCode& code) {
  double acc = 0.0;
  for (size_t i = 0; i < code.mu.size(); ++i)
    acc += code.mu[i] * code.mu[i] + std::exp(code.log_var[i]) - 1.0 -
           code.log_var[i];
  return 0.5 * acc;
}

void kl_loss_grad(const LatentCode& code, double coef, Vec* dmu,
                  Vec* dlog_var) {
  for (size_t i = 0; i < code.mu.size(); ++i) {
    if (dmu) (*dmu)[i] += coef * code.mu[i];
    if (dlog_var) (*dlog_var)[i] += coef * 0.5 * (std::exp(code.log_var[i]) - 1.0);
  }
}

}  // namespace hspn
