#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "support.hpp"

using namespace gigvad;
using gigvad::testing::random_tensor;

namespace {

FeatureMaps maps(Shape s, std::vector<double> v) { return FeatureMaps(Tensor(std::move(s), std::move(v))); }

Affine affine_with_logits(std::vector<double> bias, std::size_t d) {
  const std::size_t out = bias.size();
  return Affine{Tensor(Shape{out, d}), Tensor(Shape{out}, std::move(bias))};
}

}  // namespace

TEST(GlobalPattern, SpotCases) {
  const auto g1 = global_pattern(maps({1, 1, 1, 3}, {2, -1, 0}));
  EXPECT_EQ(std::vector<double>(g1.g.data().begin(), g1.g.data().end()), (std::vector<double>{2, -1, 0}));

  const auto g2 = global_pattern(maps({2, 1, 1, 2}, {1, 5, 3, 2}));
  EXPECT_EQ(std::vector<double>(g2.g.data().begin(), g2.g.data().end()), (std::vector<double>{3, 5}));
}

TEST(GlobalPattern, FullScaleExtent) {
  Rng rng(1);
  const auto g = global_pattern(FeatureMaps(random_tensor(Shape{8, 7, 7, 2048}, rng)));
  EXPECT_EQ(g.g.shape(), Shape{2048});
}

TEST(GlobalPattern, MatchesTripleLoopMax) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 1 + rng.below(4), w = 1 + rng.below(4), h = 1 + rng.below(4), d = 1 + rng.below(6);
    const FeatureMaps x(random_tensor(Shape{T, w, h, d}, rng, -5, 5));
    const auto g = global_pattern(x);
    for (std::size_t c = 0; c < d; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < w; ++i)
          for (std::size_t j = 0; j < h; ++j) best = std::max(best, x.tensor().at({t, i, j, c}));
      ASSERT_EQ(g.g[c], best);
    }
  }
}

TEST(GlobalPattern, RejectsWrongRank) {
  EXPECT_THROW(FeatureMaps(Tensor(Shape{2, 3})), DimensionError);
}

TEST(Enhance, ZeroCueScalesByOneAndAHalf) {
  Rng rng(2);
  const FeatureMaps x(random_tensor(Shape{2, 3, 3, 4}, rng));
  const auto xh = enhance(x, GpcVector{Tensor(Shape{4})});
  EXPECT_TRUE(xh.enhanced());
  for (std::size_t i = 0; i < x.tensor().size(); ++i) ASSERT_EQ(xh.tensor()[i], 1.5 * x.tensor()[i]);
}

TEST(Enhance, SaturatedGateDoubles) {
  const FeatureMaps x = maps({1, 1, 2, 2}, {1.0, 2.0, -3.0, 4.0});
  const auto xh = enhance(x, GpcVector{Tensor::vector({100.0, 0.0})});
  EXPECT_NEAR(xh.tensor()[0], 2.0, 1e-12);
  EXPECT_NEAR(xh.tensor()[2], -6.0, 1e-12);
  EXPECT_EQ(xh.tensor()[1], 3.0);
}

TEST(Enhance, MatchesElementwiseRecomputation) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const FeatureMaps x(random_tensor(Shape{2, 2, 3, d}, rng, -3, 3));
    const Tensor g = random_tensor(Shape{d}, rng, -6, 6);
    const auto xh = enhance(x, GpcVector{g});
    for (std::size_t i = 0; i < x.tensor().size(); ++i) {
      const double gate = 1.0 / (1.0 + std::exp(-g[i % d]));
      ASSERT_NEAR(xh.tensor()[i], (1.0 + gate) * x.tensor()[i], 1e-14);
      if (x.tensor()[i] != 0.0) {
        const double factor = xh.tensor()[i] / x.tensor()[i];
        ASSERT_GT(factor, 1.0);
        ASSERT_LT(factor, 2.0);
      }
    }
  }
}

TEST(Enhance, MonotoneInNonNegativeFeatures) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor lo = random_tensor(Shape{1, 2, 2, 3}, rng, 0, 2);
    Tensor hi = lo;
    for (double& v : hi.data()) v += rng.uniform(0, 1);
    const GpcVector g{random_tensor(Shape{3}, rng, -4, 4)};
    const auto a = enhance(FeatureMaps(lo), g), b = enhance(FeatureMaps(hi), g);
    for (std::size_t i = 0; i < lo.size(); ++i) ASSERT_LE(a.tensor()[i], b.tensor()[i]);
  }
}

TEST(Enhance, ChannelMismatchIsDimensionError) {
  EXPECT_THROW(enhance(maps({1, 1, 1, 2}, {1, 2}), GpcVector{Tensor::vector({1, 2, 3})}), DimensionError);
}

TEST(VideoOverallScore, SpotValues) {
  const GpcVector g{Tensor::vector({0.3, -0.7})};
  EXPECT_EQ(video_overall_score(g, affine_with_logits({0, 0, 0}, 2), 2), 0.5);
  // anomaly-channel logits (-1, 2): sigma(2)
  EXPECT_NEAR(video_overall_score(g, affine_with_logits({5, -1, 2}, 2), 2), 0.8807970779778823, 1e-15);
  EXPECT_THROW(video_overall_score(g, affine_with_logits({0}, 2), 0), ConfigError);
}

TEST(VideoOverallScore, AlwaysAProbability) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    HeadParams hp = HeadParams::init(3, 4, rng);
    for (double& v : hp.phi1.weight.data()) v = rng.uniform(-50, 50);
    const double s = video_overall_score(GpcVector{random_tensor(Shape{4}, rng, -10, 10)}, hp.phi1, 3);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
  }
}

TEST(VideoOverallScore, TwoChannelView) {
  const auto [normal, anomalous] = two_channel(0.25);
  EXPECT_EQ(normal, 0.75);
  EXPECT_EQ(anomalous, 0.25);
}

TEST(VideoLevelLoss, SpotValues) {
  EXPECT_NEAR(video_level_loss(1.0, 1), 0.0, 1e-6);
  EXPECT_NEAR(video_level_loss(0.5, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(video_level_loss(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(video_level_loss(0.9, 0), 2.302585092994045, 1e-12);
}

TEST(VideoLevelLoss, NonNegativeAndZeroOnlyAtTheCorrectExtreme) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double s = rng.uniform();
    ASSERT_GE(video_level_loss(s, 0), 0.0);
    ASSERT_GE(video_level_loss(s, 1), 0.0);
  }
  EXPECT_LT(video_level_loss(0.0, 0), 1e-6);
  EXPECT_GT(video_level_loss(0.0, 1), 16.0);  // clamped at -ln(1e-7)
}

TEST(GigPipeline, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  int checked = 0;
  for (int attempt = 0; checked < 60 && attempt < 300; ++attempt) {
    const HeadParams hp = HeadParams::init(3, 5, rng);
    const int y = static_cast<int>(rng.below(2));
    const auto r = grad_check(
        [&](Tape& t, Var x) {
          const Var g = global_pattern(t, x);
          const Var xh = enhance(t, x, g);
          const Var pooled = global_pattern(t, xh);
          return video_level_loss(t, video_overall_score(t, pooled, put(t, hp.phi1)), y);
        },
        random_tensor(Shape{2, 2, 2, 5}, rng));
    if (r.min_margin < 1e-3) continue;
    ++checked;
    ASSERT_TRUE(r.pass) << r.max_rel_err;
  }
  EXPECT_EQ(checked, 60);
}

TEST(HeadParams, InitBoundsAndErrors) {
  Rng rng(8);
  const HeadParams hp = HeadParams::init(3, 32, rng);
  EXPECT_EQ(hp.phi1.weight.shape(), (Shape{4, 32}));
  const double bound = 1.0 / std::sqrt(32.0);
  for (const Tensor* t : hp.tensors()) {
    for (double v : t->data()) ASSERT_LE(std::abs(v), bound);
  }
  for (double v : hp.phi2.bias.data()) EXPECT_EQ(v, 0.0);
  for (const Tensor& a : hp.accumulators) {
    for (double v : a.data()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_THROW(HeadParams::init(0, 4, rng), ConfigError);
  EXPECT_THROW(HeadParams::init(2, 0, rng), ConfigError);
}

TEST(VideoLabels, ExtendedTarget) {
  const VideoLabels y(std::vector<std::uint8_t>{0, 1, 1});
  const Tensor t = y.extended_target();
  EXPECT_EQ(std::vector<double>(t.data().begin(), t.data().end()), (std::vector<double>{0, 0, 1, 1}));
  const Tensor n = VideoLabels::normal(2).extended_target();
  EXPECT_EQ(std::vector<double>(n.data().begin(), n.data().end()), (std::vector<double>{1, 0, 0}));
  EXPECT_THROW(VideoLabels(std::vector<std::uint8_t>{2}), ConfigError);
}
