#include "hspn/completion/agb.hpp"

#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

void Agb::init(const std::string& name, int p_width, int q_width, int d_att,
               Rng& rng) {
  f1_.init(name + ".f1", p_width, d_att, rng);
  f2_.init(name + ".f2", q_width, d_att, rng);
  f3_.init(name + ".f3", q_width, p_width, rng);
  f4_.init(name + ".f4", p_width, p_width, rng);
}

Mat Agb::forward(const Mat& p, const Mat* q, Memo* memo) const {
  const Mat& qq = q ? *q : p;
  if (p.cols != f4_.in_dim() || qq.cols != f3_.in_dim())
    throw std::invalid_argument("Agb: feature width mismatch");

  Memo local;
  Memo& m = memo ? *memo : local;
  m.p = p;
  m.q = qq;
  m.f1p = f1_.forward(p);
  m.f2q = f2_.forward(qq);
  m.f3q = f3_.forward(qq);

  Mat z(p.rows, qq.rows);
  kernels::gemm_nt(m.f1p.data(), m.f2q.data(), z.data(), p.rows, m.f1p.cols,
                   qq.rows, false);
  m.scores = nn::softmax_rows(z);

  m.mixed = p;
  kernels::gemm_nn(m.scores.data(), m.f3q.data(), m.mixed.data(), p.rows,
                   qq.rows, m.f3q.cols, true);
  return f4_.forward(m.mixed);
}

Agb::Grads Agb::backward(const Memo& memo, const Mat& dout, bool self) {
  Grads g;
  g.dp.resize(memo.p.rows, memo.p.cols);
  g.dq.resize(memo.q.rows, memo.q.cols);

  // through f4: mixed = p + scores f3q
  const Mat dmixed = f4_.backward(memo.mixed, dout);
  for (size_t i = 0; i < dmixed.d.size(); ++i) g.dp.d[i] += dmixed.d[i];

  // d scores = dmixed f3q^T ; d f3q = scores^T dmixed
  Mat dscores(memo.scores.rows, memo.scores.cols);
  kernels::gemm_nt(dmixed.data(), memo.f3q.data(), dscores.data(), dmixed.rows,
                   dmixed.cols, memo.f3q.rows, false);
  Mat df3q(memo.f3q.rows, memo.f3q.cols);
  kernels::gemm_tn(memo.scores.data(), dmixed.data(), df3q.data(),
                   memo.f3q.rows, memo.scores.rows, dmixed.cols, false);
  {
    const Mat dq3 = f3_.backward(memo.q, df3q);
    for (size_t i = 0; i < dq3.d.size(); ++i) g.dq.d[i] += dq3.d[i];
  }

  // softmax, then the score product z = f1p f2q^T
  const Mat dz = nn::softmax_rows_backward(memo.scores, dscores);
  Mat df1p(memo.f1p.rows, memo.f1p.cols);
  kernels::gemm_nn(dz.data(), memo.f2q.data(), df1p.data(), dz.rows, dz.cols,
                   memo.f2q.cols, false);
  Mat df2q(memo.f2q.rows, memo.f2q.cols);
  kernels::gemm_tn(dz.data(), memo.f1p.data(), df2q.data(), memo.f2q.rows,
                   dz.rows, memo.f1p.cols, false);
  {
    const Mat dp1 = f1_.backward(memo.p, df1p);
    for (size_t i = 0; i < dp1.d.size(); ++i) g.dp.d[i] += dp1.d[i];
    const Mat dq2 = f2_.backward(memo.q, df2q);
    for (size_t i = 0; i < dq2.d.size(); ++i) g.dq.d[i] += dq2.d[i];
  }

  if (self)
    for (size_t i = 0; i < g.dp.d.size(); ++i) g.dp.d[i] += g.dq.d[i];
  return g;
}

}  // namespace hspn
