#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "hspn/core/rng.hpp"
#include "hspn/nn/adam.hpp"
#include "hspn/sampling/sampling.hpp"
#include "hspn/sampling/set_abstraction.hpp"
#include "oracles.hpp"

using namespace hspn;

TEST_SUITE_BEGIN("sampling");

TEST_CASE("farthest_point_sample basics") {
  Rng rng(1);
  const PointCloud c = oracle::random_cloud(rng, 64);

  // m = N is a permutation of all indices
  auto all = farthest_point_sample(c, 64, 3);
  std::set<int> uniq(all.begin(), all.end());
  CHECK(uniq.size() == 64);

  // m = 1 returns the seed
  CHECK(farthest_point_sample(c, 1, 5) == std::vector<int>{5});

  CHECK_THROWS_AS(farthest_point_sample(c, 65, 0), std::invalid_argument);
  CHECK_THROWS_AS(farthest_point_sample(c, 1, 64), std::invalid_argument);
}

TEST_CASE("farthest_point_sample matches the greedy oracle") {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const PointCloud c = oracle::random_cloud(rng, 64);
    const int seed = static_cast<int>(rng.uniform_index(64));
    CHECK(farthest_point_sample(c, 8, seed) == oracle::fps(c, 8, seed));
  }
}

TEST_CASE("fps covering radius is non-increasing in m") {
  Rng rng(3);
  const PointCloud c = oracle::random_cloud(rng, 128);
  auto covering_radius = [&](const std::vector<int>& sample) {
    double worst = 0.0;
    for (int i = 0; i < c.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int s : sample) best = std::min(best, oracle::sqdist3(c.p(i), c.p(s)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {4, 8, 16, 32, 64}) {
    const double r = covering_radius(farthest_point_sample(c, m, 0));
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
}

TEST_CASE("ball_query membership and padding") {
  Rng rng(4);
  const PointCloud cloud = oracle::random_cloud(rng, 80);

  GroupingSpec spec;
  spec.npoint = 8;
  spec.kmax = 100;
  spec.radius = 10.0;  // covers everything
  spec.mlp_widths = {8};
  auto centers_idx = farthest_point_sample(cloud, 8, 0);
  PointCloud centers(8);
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 3; ++k) centers.xyz[3 * i + k] = cloud.xyz[3 * centers_idx[i] + k];

  auto groups = ball_query(centers, cloud, spec);
  for (const auto& g : groups) {
    CHECK(static_cast<int>(g.size()) == spec.kmax);
    std::set<int> uniq(g.begin(), g.end());
    CHECK(uniq.size() == 80);  // all points, then padding repeats
  }

  // tiny radius with centers on cloud points: each group is just the center
  spec.radius = 1e-12;
  spec.kmax = 4;
  groups = ball_query(centers, cloud, spec);
  for (int c = 0; c < 8; ++c)
    for (int k = 0; k < 4; ++k) CHECK(groups[c][k] == centers_idx[c]);

  // membership equals the brute-force radius filter
  spec.radius = 0.6;
  spec.kmax = 80;
  groups = ball_query(centers, cloud, spec);
  for (int c = 0; c < 8; ++c) {
    auto want = oracle::ball_members(cloud, centers.p(c), spec.radius);
    std::set<int> got(groups[c].begin(), groups[c].end());
    CHECK(got == std::set<int>(want.begin(), want.end()));
  }

  // empty ball: nearest-point fallback
  PointCloud far_center;
  far_center.push_back(50, 50, 50);
  spec.radius = 0.001;
  spec.kmax = 3;
  groups = ball_query(far_center, cloud, spec);
  REQUIRE(groups.size() == 1);
  int nearest = 0;
  for (int i = 1; i < cloud.size(); ++i)
    if (oracle::sqdist3(cloud.p(i), far_center.p(0)) <
        oracle::sqdist3(cloud.p(nearest), far_center.p(0)))
      nearest = i;
  for (int k = 0; k < 3; ++k) CHECK(groups[0][k] == nearest);
}

TEST_CASE("set_abstraction shape and within-group permutation invariance") {
  Rng rng(5);
  const PointCloud cloud = oracle::random_cloud(rng, 60);
  Mat feats(60, 4);
  for (auto& v : feats.d) v = rng.uniform(-1, 1);
  FeaturedCloud in{cloud, feats};

  GroupingSpec spec;
  spec.npoint = 12;
  spec.radius = 0.5;
  spec.kmax = 8;
  spec.mlp_widths = {16, 24};

  SetAbstraction sa;
  Rng wrng(99);
  sa.init("sa", 4, spec, false, wrng);

  SetAbstraction::Memo memo;
  const FeaturedCloud out = sa.forward(in, &memo);
  CHECK(out.size() == 12);
  CHECK(out.width() == 24);

  // permuting the input points leaves the pooled features for matching
  // centers unchanged (canonical seeding)
  sa.canonical_seed = true;
  const FeaturedCloud a = sa.forward(in, nullptr);

  std::vector<int> order(60);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 59; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  FeaturedCloud permuted;
  permuted.points = PointCloud(60);
  permuted.features = Mat(60, 4);
  for (int i = 0; i < 60; ++i) {
    for (int k = 0; k < 3; ++k) permuted.points.xyz[3 * i + k] = cloud.xyz[3 * order[i] + k];
    for (int k = 0; k < 4; ++k) permuted.features(i, k) = feats(order[i], k);
  }
  const FeaturedCloud b = sa.forward(permuted, nullptr);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.points.xyz.size(); ++k)
    CHECK(a.points.xyz[k] == b.points.xyz[k]);
  for (size_t k = 0; k < a.features.d.size(); ++k)
    CHECK(a.features.d[k] == doctest::Approx(b.features.d[k]).epsilon(1e-12));
}

TEST_CASE("set_abstraction gradients match finite differences") {
  Rng rng(6);
  const PointCloud cloud = oracle::random_cloud(rng, 20);
  Mat feats(20, 3);
  for (auto& v : feats.d) v = rng.uniform(-1, 1);

  GroupingSpec spec;
  spec.npoint = 5;
  spec.radius = 0.8;
  spec.kmax = 6;
  spec.mlp_widths = {7, 5};

  SetAbstraction sa;
  Rng wrng(7);
  sa.init("sa", 3, spec, false, wrng);

  // scalar objective: weighted sum of output features
  Mat weight(5, 5);
  for (auto& v : weight.d) v = rng.uniform(-1, 1);
  auto objective = [&](const FeaturedCloud& in) {
    const FeaturedCloud out = sa.forward(in, nullptr);
    double s = 0.0;
    for (size_t i = 0; i < out.features.d.size(); ++i) s += weight.d[i] * out.features.d[i];
    return s;
  };

  FeaturedCloud in{cloud, feats};
  SetAbstraction::Memo memo;
  const FeaturedCloud out = sa.forward(in, &memo);
  (void)out;
  Mat dfeat(20, 3), dcoord(20, 3);
  nn::ParamRefs ps;
  sa.params(ps);
  nn::zero_grads(ps);
  sa.backward(memo, weight, &dfeat, &dcoord);

  for (int trial = 0; trial < 10; ++trial) {
    const int i = static_cast<int>(rng.uniform_index(20));
    const int c = static_cast<int>(rng.uniform_index(3));

    double fd = oracle::central_diff(
        [&](double x) {
          FeaturedCloud probe = in;
          probe.features(i, c) = x;
          return objective(probe);
        },
        in.features(i, c));
    CHECK(oracle::rel_err(dfeat(i, c), fd) < 1e-4);

    fd = oracle::central_diff(
        [&](double x) {
          FeaturedCloud probe = in;
          probe.points.xyz[3 * i + c] = x;
          return objective(probe);
        },
        in.points.xyz[3 * i + c]);
    CHECK(oracle::rel_err(dcoord(i, c), fd) < 1e-4);
  }

  // parameter gradients for the first MLP layer
  for (int trial = 0; trial < 6; ++trial) {
    nn::Param* p = ps[static_cast<size_t>(rng.uniform_index(ps.size()))];
    const size_t k = rng.uniform_index(p->value.d.size());
    const double fd = oracle::central_diff(
        [&](double x) {
          const double saved = p->value.d[k];
          p->value.d[k] = x;
          const double s = objective(in);
          p->value.d[k] = saved;
          return s;
        },
        p->value.d[k]);
    CHECK(oracle::rel_err(p->grad.d[k], fd) < 1e-4);
  }
}

TEST_SUITE_END();
