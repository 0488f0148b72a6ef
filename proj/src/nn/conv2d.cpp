#include "hspn/nn/conv2d.hpp"

#include "hspn/kernels/kernels.hpp"

namespace hspn::nn {

void Conv2d::init(const std::string& name, int in_ch, int out_ch, Rng& rng) {
  W.init(name + ".W", out_ch, in_ch * kKernel * kKernel);
  b.init(name + ".b", 1, out_ch);
  kaiming_init(W.value, in_ch * kKernel * kKernel, rng);
}

Mat Conv2d::im2col(const FeatureMap& x) const {
  const int oh = out_extent(x.h), ow = out_extent(x.w);
  const int c = x.channels();
  Mat cols(oh * ow, c * kKernel * kKernel);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double* dst = cols.row(oy * ow + ox);
      int slot = 0;
      for (int ky = 0; ky < kKernel; ++ky) {
        for (int kx = 0; kx < kKernel; ++kx) {
          const int iy = oy * kStride + ky - kPad;
          const int ix = ox * kStride + kx - kPad;
          if (iy >= 0 && iy < x.h && ix >= 0 && ix < x.w) {
            const double* src = x.data.row(iy * x.w + ix);
            for (int ch = 0; ch < c; ++ch) dst[slot + ch] = src[ch];
          } else {
            for (int ch = 0; ch < c; ++ch) dst[slot + ch] = 0.0;
          }
          slot += c;
        }
      }
    }
  }
  return cols;
}

FeatureMap Conv2d::forward(const FeatureMap& x) const {
  const Mat cols = im2col(x);
  FeatureMap y(out_extent(x.h), out_extent(x.w), W.value.rows);
  kernels::gemm_nt(cols.data(), W.value.data(), y.data.data(), cols.rows,
                   cols.cols, W.value.rows, false);
  for (int i = 0; i < y.data.rows; ++i)
    kernels::axpy(1.0, b.value.data(), y.data.row(i), y.data.cols);
  return y;
}

FeatureMap Conv2d::backward(const FeatureMap& x, const FeatureMap& dy) {
  const Mat cols = im2col(x);
  // dW += dy^T cols
  kernels::gemm_tn(dy.data.data(), cols.data(), W.grad.data(), W.value.rows,
                   dy.data.rows, W.value.cols, true);
  for (int i = 0; i < dy.data.rows; ++i)
    kernels::axpy(1.0, dy.data.row(i), b.grad.data(), dy.data.cols);

  // dcols = dy W, then scatter back through the patch geometry
  Mat dcols(cols.rows, cols.cols);
  kernels::gemm_nn(dy.data.data(), W.value.data(), dcols.data(), dy.data.rows,
                   dy.data.cols, W.value.cols, false);

  FeatureMap dx(x.h, x.w, x.channels());
  const int oh = out_extent(x.h), ow = out_extent(x.w);
  const int c = x.channels();
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const double* src = dcols.row(oy * ow + ox);
      int slot = 0;
      for (int ky = 0; ky < kKernel; ++ky) {
        for (int kx = 0; kx < kKernel; ++kx) {
          const int iy = oy * kStride + ky - kPad;
          const int ix = ox * kStride + kx - kPad;
          if (iy >= 0 && iy < x.h && ix >= 0 && ix < x.w) {
            double* dst = dx.data.row(iy * x.w + ix);
            for (int ch = 0; ch < c; ++ch) dst[ch] += src[slot + ch];
          }
          slot += c;
        }
      }
    }
  }
  return dx;
}

}  // namespace hspn::nn
