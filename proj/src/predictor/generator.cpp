#include "hspn/predictor/generator.hpp"

#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

void BranchingConfig::validate() const {
  if (degrees.empty()) throw std::invalid_argument("BranchingConfig: no degrees");
  for (int d : degrees)
    if (d < 1) throw std::invalid_argument("BranchingConfig: degree < 1");
  if (k_support < 1) throw std::invalid_argument("BranchingConfig: K < 1");
  if (root_count < 1) throw std::invalid_argument("BranchingConfig: root_count < 1");
  if (feature_widths.size() != degrees.size() + 1)
    throw std::invalid_argument("BranchingConfig: need one width per level");
  if (leaf_count() != expected_leaves)
    throw std::invalid_argument("BranchingConfig: schedule yields " +
                                std::to_string(leaf_count()) + " leaves, want " +
                                std::to_string(expected_leaves));
}

std::vector<int> TreeState::ancestor_path(int level, int i) const {
  std::vector<int> path(level);
  int cur = i;
  for (int l = level; l > 0; --l) {
    cur = parent[l][cur];
    path[l - 1] = cur;
  }
  return path;
}

// ---------------------------------------------------------------------------
// GcnBlock
// ---------------------------------------------------------------------------

void GcnBlock::init(const std::string& name, int w_in, int w_out, int k_support,
                    const std::vector<int>& ancestor_widths, Rng& rng) {
  // the pre-activation sums 1 loop term (itself a K-branch sum) plus one
  // term per ancestor level; spreading the init variance across the terms
  // keeps the stage gain near one
  const int n_terms = 1 + static_cast<int>(ancestor_widths.size());
  support.resize(k_support);
  for (int k = 0; k < k_support; ++k) {
    support[k].init(name + ".support" + std::to_string(k), w_out, w_in);
    nn::kaiming_init(support[k].value, w_in * k_support * n_terms, rng);
  }
  ancestor_u.resize(ancestor_widths.size());
  for (size_t j = 0; j < ancestor_widths.size(); ++j) {
    ancestor_u[j].init(name + ".u" + std::to_string(j), w_out, ancestor_widths[j]);
    nn::kaiming_init(ancestor_u[j].value, ancestor_widths[j] * n_terms, rng);
  }
  bias.init(name + ".b", 1, w_out);
}

Mat GcnBlock::forward_pre(const Mat& feats,
                          const std::vector<std::vector<int>>& paths,
                          const std::vector<Mat>& ancestor_levels) const {
  if (feats.cols != support[0].value.cols)
    throw std::invalid_argument("GcnBlock: input width " + std::to_string(feats.cols) +
                                " != " + std::to_string(support[0].value.cols));
  const int n = feats.rows;
  const int w_out = support[0].value.rows;

  Mat pre(n, w_out);
  for (const auto& wk : support)
    kernels::gemm_nt(feats.data(), wk.value.data(), pre.data(), n, feats.cols,
                     w_out, true);

  if (!ancestor_u.empty()) {
    if (static_cast<int>(paths.size()) != n)
      throw std::invalid_argument("GcnBlock: one ancestor path per point required");
    // map each ancestor level once, then gather per point
    for (size_t j = 0; j < ancestor_u.size(); ++j) {
      const Mat& level = ancestor_levels[j];
      Mat mapped(level.rows, w_out);
      kernels::gemm_nt(level.data(), ancestor_u[j].value.data(), mapped.data(),
                       level.rows, level.cols, w_out, false);
      for (int i = 0; i < n; ++i)
        kernels::axpy(1.0, mapped.row(paths[i][j]), pre.row(i), w_out);
    }
  }
  for (int i = 0; i < n; ++i) kernels::axpy(1.0, bias.value.data(), pre.row(i), w_out);
  return pre;
}

Mat GcnBlock::backward_pre(const Mat& feats,
                           const std::vector<std::vector<int>>& paths,
                           const std::vector<Mat>& ancestor_levels,
                           const Mat& dpre, std::vector<Mat>* dlevels) {
  const int n = feats.rows;
  const int w_out = support[0].value.rows;

  for (int i = 0; i < n; ++i)
    kernels::axpy(1.0, dpre.row(i), bias.grad.data(), w_out);

  // every support branch sees the same input, so they share one gradient
  Mat dw(w_out, feats.cols);
  kernels::gemm_tn(dpre.data(), feats.data(), dw.data(), w_out, n, feats.cols, false);
  for (auto& wk : support)
    for (size_t i = 0; i < dw.d.size(); ++i) wk.grad.d[i] += dw.d[i];

  Mat dfeats(n, feats.cols);
  for (const auto& wk : support)
    kernels::gemm_nn(dpre.data(), wk.value.data(), dfeats.data(), n, w_out,
                     feats.cols, true);

  if (!ancestor_u.empty()) {
    for (size_t j = 0; j < ancestor_u.size(); ++j) {
      const Mat& level = ancestor_levels[j];
      Mat dmapped(level.rows, w_out);
      for (int i = 0; i < n; ++i)
        kernels::axpy(1.0, dpre.row(i), dmapped.row(paths[i][j]), w_out);
      // dU_j += dmapped^T level ; dlevel += dmapped U_j
      kernels::gemm_tn(dmapped.data(), level.data(), ancestor_u[j].grad.data(),
                       w_out, level.rows, level.cols, true);
      if (dlevels)
        kernels::gemm_nn(dmapped.data(), ancestor_u[j].value.data(),
                         (*dlevels)[j].data(), level.rows, w_out, level.cols,
                         true);
    }
  }
  return dfeats;
}

// ---------------------------------------------------------------------------
// BranchStage
// ---------------------------------------------------------------------------

void BranchStage::init(const std::string& name, int width, int degree, Rng& rng) {
  child_w.resize(degree);
  child_b.resize(degree);
  for (int c = 0; c < degree; ++c) {
    child_w[c].init(name + ".w" + std::to_string(c), width, width);
    nn::kaiming_init(child_w[c].value, width, rng);
    child_b[c].init(name + ".o" + std::to_string(c), 1, width);
  }
}

Mat BranchStage::forward(const Mat& parent_feats,
                         std::vector<int>* parent_index) const {
  const int n = parent_feats.rows;
  const int w = parent_feats.cols;
  const int d = static_cast<int>(child_w.size());
  Mat children(n * d, w);
  Mat tmp(n, w);
  if (parent_index) parent_index->assign(n * d, 0);
  for (int c = 0; c < d; ++c) {
    kernels::gemm_nt(parent_feats.data(), child_w[c].value.data(), tmp.data(),
                     n, w, w, false);
    for (int i = 0; i < n; ++i) {
      double* row = children.row(i * d + c);
      for (int k = 0; k < w; ++k) row[k] = tmp(i, k) + child_b[c].value.d[k];
      if (parent_index) (*parent_index)[i * d + c] = i;
    }
  }
  return children;
}

Mat BranchStage::backward(const Mat& parent_feats, const Mat& dchildren) {
  const int n = parent_feats.rows;
  const int w = parent_feats.cols;
  const int d = static_cast<int>(child_w.size());
  Mat dparent(n, w);
  Mat slice(n, w);
  for (int c = 0; c < d; ++c) {
    for (int i = 0; i < n; ++i) {
      const double* row = dchildren.row(i * d + c);
      for (int k = 0; k < w; ++k) slice(i, k) = row[k];
      kernels::axpy(1.0, row, child_b[c].grad.data(), w);
    }
    kernels::gemm_tn(slice.data(), parent_feats.data(), child_w[c].grad.data(),
                     w, n, w, true);
    kernels::gemm_nn(slice.data(), child_w[c].value.data(), dparent.data(), n,
                     w, w, true);
  }
  return dparent;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

void Generator::init(const BranchingConfig& config, Rng& rng) {
  config.validate();
  config_ = config;
  const int stages = config.stage_count();
  branches_.resize(stages);
  gcn_.resize(stages);
  std::vector<int> ancestor_widths;
  for (int s = 0; s < stages; ++s) {
    const int w_in = config.feature_widths[s];
    const int w_out = config.feature_widths[s + 1];
    branches_[s].init("generator.branch" + std::to_string(s), w_in,
                      config.degrees[s], rng);
    ancestor_widths.push_back(w_in);
    gcn_[s].init("generator.gcn" + std::to_string(s), w_in, w_out,
                 config.k_support, ancestor_widths, rng);
  }
}

PointCloud Generator::generate(const LatentCode& code, Memo* memo) const {
  config_.validate();
  if (static_cast<int>(code.z.size()) != config_.feature_widths[0])
    throw std::invalid_argument("Generator: z width mismatch");

  Memo local;
  Memo& m = memo ? *memo : local;
  m.tree.levels.clear();
  m.tree.parent.assign(1, {});
  m.branched.clear();
  m.pre.clear();
  m.paths.clear();

  Mat root(config_.root_count, config_.feature_widths[0]);
  for (int r = 0; r < config_.root_count; ++r)
    for (size_t k = 0; k < code.z.size(); ++k) root(r, static_cast<int>(k)) = code.z[k];
  m.tree.levels.push_back(std::move(root));

  for (int s = 0; s < config_.stage_count(); ++s) {
    std::vector<int> parent;
    Mat branched = branches_[s].forward(m.tree.levels[s], &parent);
    m.tree.parent.push_back(parent);

    // child path = parent path + parent
    std::vector<std::vector<int>> paths(branched.rows);
    for (int i = 0; i < branched.rows; ++i) {
      paths[i] = m.tree.ancestor_path(s, parent[i]);
      paths[i].push_back(parent[i]);
    }

    Mat pre = gcn_[s].forward_pre(branched, paths, m.tree.levels);
    m.tree.levels.push_back(nn::lrelu(pre));
    m.branched.push_back(std::move(branched));
    m.pre.push_back(std::move(pre));
    m.paths.push_back(std::move(paths));
  }

  const Mat& leaves = m.tree.levels.back();
  if (leaves.cols != 3)
    throw std::invalid_argument("Generator: final width must be 3");
  PointCloud cloud(leaves.rows);
  cloud.xyz = leaves.d;
  return cloud;
}

Vec Generator::backward(const Memo& memo, const Mat& dcloud) {
  const int stages = config_.stage_count();
  std::vector<Mat> dlevels(stages + 1);
  for (int l = 0; l <= stages; ++l)
    dlevels[l].resize(memo.tree.levels[l].rows, memo.tree.levels[l].cols);
  dlevels[stages] = dcloud;

  for (int s = stages - 1; s >= 0; --s) {
    const Mat dpre = nn::lrelu_backward(memo.pre[s], dlevels[s + 1]);
    Mat dbranched =
        gcn_[s].backward_pre(memo.branched[s], memo.paths[s], memo.tree.levels,
                             dpre, &dlevels);
    const Mat dparent = branches_[s].backward(memo.tree.levels[s], dbranched);
    for (size_t i = 0; i < dparent.d.size(); ++i) dlevels[s].d[i] += dparent.d[i];
  }

  Vec dz(config_.feature_widths[0], 0.0);
  for (int r = 0; r < config_.root_count; ++r)
    for (int k = 0; k < config_.feature_widths[0]; ++k) dz[k] += dlevels[0](r, k);
  return dz;
}

}  // namespace hspn
