#include "hspn/harness/classify.hpp"

#include <cmath>

#include "hspn/nn/adam.hpp"

namespace hspn {

struct ClassifierMemo {
  SetAbstraction::Memo m1, m2, m3;
  FeaturedCloud s1, s2, s3;
  Mat hpre;
};

void PointClassifier::init(uint64_t seed) {
  Rng rng(Rng::splitmix64(seed ^ 0xc1a551ull));
  GroupingSpec g1{128, 0.3, 16, {32, 64}};
  GroupingSpec g2{32, 0.6, 16, {64, 128}};
  GroupingSpec g3;
  g3.mlp_widths = {128, 256};
  sa1_.init("classifier.sa1", 0, g1, false, rng);
  sa2_.init("classifier.sa2", 64, g2, false, rng);
  sa3_.init("classifier.sa3", 128, g3, true, rng);
  sa1_.canonical_seed = sa2_.canonical_seed = true;
  h1_.init("classifier.h1", 256, 64, rng);
  h2_.init("classifier.h2", 64, 1, rng);
}

nn::ParamRefs PointClassifier::params() {
  nn::ParamRefs out;
  sa1_.params(out);
  sa2_.params(out);
  sa3_.params(out);
  h1_.params(out);
  h2_.params(out);
  return out;
}

double PointClassifier::logit(const PointCloud& cloud, ClassifierMemo* memo) const {
  ClassifierMemo local;
  ClassifierMemo& m = memo ? *memo : local;
  FeaturedCloud in{cloud, Mat(cloud.size(), 0)};
  m.s1 = sa1_.forward(in, &m.m1);
  m.s2 = sa2_.forward(m.s1, &m.m2);
  m.s3 = sa3_.forward(m.s2, &m.m3);
  m.hpre = h1_.forward(m.s3.features);
  const Mat ha = nn::lrelu(m.hpre);
  return h2_.forward(ha)(0, 0);
}

void PointClassifier::backward(ClassifierMemo& m, double dlogit) {
  Mat dout(1, 1);
  dout(0, 0) = dlogit;
  const Mat ha = nn::lrelu(m.hpre);
  Mat d = h2_.backward(ha, dout);
  d = nn::lrelu_backward(m.hpre, d);
  Mat dglobal = h1_.backward(m.s3.features, d);

  Mat ds2(m.s2.size(), m.s2.width());
  Mat ds1(m.s1.size(), m.s1.width());
  sa3_.backward(m.m3, dglobal, &ds2, nullptr);
  sa2_.backward(m.m2, ds2, &ds1, nullptr);
  sa1_.backward(m.m1, ds1, nullptr, nullptr);
}

double PointClassifier::score(const PointCloud& cloud) const {
  return nn::sigmoid(logit(cloud, nullptr));
}

void PointClassifier::train(const std::vector<const PointCloud*>& clouds,
                            const std::vector<int>& labels, int epochs,
                            double lr, Rng& rng) {
  nn::Adam opt(lr);
  const auto ps = params();
  std::vector<int> order(clouds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    for (int i : order) {
      ClassifierMemo memo;
      const double z = logit(*clouds[i], &memo);
      const double p = nn::sigmoid(z);
      backward(memo, p - labels[i]);  // BCE gradient
      opt.step(ps);
    }
  }
}

std::vector<ClassifyResult> classify_experiment(
    const TrainConfig& cfg, const std::vector<SyntheticSample>& dataset,
    const std::vector<std::pair<std::string, std::string>>& tag_ckpts,
    const std::string& eval_split) {
  if (tag_ckpts.empty())
    throw std::invalid_argument("classify: no variant checkpoints given");

  Rng rng(Rng::splitmix64(cfg.seed ^ 0xc1a5522ull));

  // generations per variant: train split feeds the classifier (as the
  // "false" examples), the eval split is scored afterwards
  struct VariantClouds {
    std::string tag;
    std::vector<PointCloud> train_gen;
    std::vector<PointCloud> eval_gen;
  };
  std::vector<VariantClouds> variants;
  for (const auto& [tag, path] : tag_ckpts) {
    PredictorModel pred;
    CompletionModel comp;
    const LoadedCheckpoint lc = load_checkpoint(path, &pred, &comp);
    if (!lc.has_predictor)
      throw std::invalid_argument("classify: checkpoint '" + path +
                                  "' has no predictor section");
    VariantClouds v;
    v.tag = tag;
    for (const auto& s : dataset) {
      PointCloud cloud = pred.predict(image_stack_for(s, pred.slices));
      if (lc.has_completion) cloud = comp.net.complete(cloud, nullptr);
      const bool in_eval = eval_split == "all" || s.split == eval_split;
      if (in_eval) v.eval_gen.push_back(cloud);
      if (s.split == "train" || eval_split == "all") v.train_gen.push_back(std::move(cloud));
    }
    if (v.eval_gen.empty())
      throw std::invalid_argument("classify: empty eval split");
    variants.push_back(std::move(v));
  }

  PointClassifier clf;
  clf.init(cfg.seed);

  std::vector<const PointCloud*> clouds;
  std::vector<int> labels;
  for (const auto& s : dataset) {
    clouds.push_back(&s.gt);
    labels.push_back(1);
  }
  for (const auto& v : variants)
    for (const auto& c : v.train_gen) {
      clouds.push_back(&c);
      labels.push_back(0);
    }
  clf.train(clouds, labels, std::max(1, cfg.epochs), cfg.lr, rng);

  std::vector<ClassifyResult> results;
  for (const auto& v : variants) {
    double acc = 0.0;
    for (const auto& c : v.eval_gen) acc += clf.score(c);
    results.push_back({v.tag, acc / v.eval_gen.size()});
  }
  return results;
}

}  // namespace hspn
