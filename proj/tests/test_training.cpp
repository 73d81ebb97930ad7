#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "support.hpp"

using namespace gigvad;
using gigvad::testing::random_tensor;

namespace {

VideoSpec normal_video(std::uint64_t id, std::size_t frames, std::size_t classes = 3) {
  return VideoSpec{id, frames, VideoLabels::normal(classes), {}};
}

VideoSpec anomalous_video(std::uint64_t id, std::size_t frames, std::size_t cls, std::size_t classes = 3) {
  std::vector<std::uint8_t> y(classes, 0);
  y[cls - 1] = 1;
  return VideoSpec{id, frames, VideoLabels(y), {{cls, 0, frames - 1}}};
}

DatasetSpec tiny_dataset() {
  GeneratorSpec g;
  g.videos = 12;
  g.normal = 5;
  return generate_dataset(g);
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.lr = 0.05;
  return c;
}

}  // namespace

TEST(SampleSegments, ExactDivisionGivesThirtyFrameSegments) {
  Rng rng(1);
  const auto clips = sample_segments(240, 8, 6, 5, rng);
  ASSERT_EQ(clips.size(), 8u);
  for (std::size_t t = 0; t < 8; ++t) {
    ASSERT_EQ(clips[t].size(), 6u);
    EXPECT_GE(clips[t].front(), 30 * t);
    EXPECT_LT(clips[t].back(), 30 * (t + 1));
    for (std::size_t c = 1; c < 6; ++c) EXPECT_EQ(clips[t][c] - clips[t][c - 1], 5u);
  }
}

TEST(SampleSegments, TwentySixFramesAdmitOnlyOffsetZero) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto clips = sample_segments(26, 1, 6, 5, rng);
    EXPECT_EQ(clips[0], (std::vector<std::size_t>{0, 5, 10, 15, 20, 25}));
  }
}

TEST(SampleSegments, SingleFrameSegmentsClamp) {
  Rng rng(2);
  const auto clips = sample_segments(8, 8, 6, 5, rng);
  for (std::size_t t = 0; t < 8; ++t) EXPECT_EQ(clips[t], std::vector<std::size_t>(6, t));
}

TEST(SampleSegments, StartsStayInsideTheirSegment) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t frames = 1 + rng.below(500), T = 1 + rng.below(10);
    const auto clips = sample_segments(frames, T, 6, 5, rng);
    for (const auto& seg : clips) {
      for (std::size_t f : seg) ASSERT_LT(f, frames);
    }
  }
  EXPECT_THROW(sample_segments(0, 8, 6, 5, rng), ConfigError);
}

TEST(Backbone, DeterministicForFixedInputs) {
  Rng a(4), b(4);
  const VideoSpec v = anomalous_video(9, 200, 2);
  const auto ca = sample_segments(200, 8, 6, 5, a), cb = sample_segments(200, 8, 6, 5, b);
  EXPECT_EQ(synthetic_backbone(ca, v, {}, 7).tensor(), synthetic_backbone(cb, v, {}, 7).tensor());
  EXPECT_NE(synthetic_backbone(ca, v, {}, 7).tensor(), synthetic_backbone(ca, v, {}, 8).tensor());
}

TEST(Backbone, NormalVideoCarriesNoSignature) {
  const FeatureDims dims{4, 4, 32};
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t id = 0; id < 10; ++id) {
    Rng rng(id);
    const FeatureMaps x = synthetic_backbone(sample_segments(240, 8, 6, 5, rng), normal_video(id, 240), dims, 7);
    for (std::size_t cls = 1; cls <= 3; ++cls) {
      const auto [first, width] = signature_channels(cls, 3, dims.d);
      for (std::size_t t = 0; t < 8; ++t)
        for (std::size_t i = 0; i < 4; ++i)
          for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t c = 0; c < width; ++c) {
              sum += x.tensor().at({t, i, j, (first + c) % dims.d});
              ++n;
            }
    }
  }
  ASSERT_GE(n, 10000u);
  EXPECT_LT(std::abs(sum / static_cast<double>(n)), 0.2);
}

TEST(Backbone, AnomalousSegmentsAreOffsetAtTheSignature) {
  const FeatureDims dims{4, 4, 32};
  const VideoSpec v = anomalous_video(3, 240, 2);
  const VideoSpec n = normal_video(3, 240);
  Rng rng(6);
  const auto clips = sample_segments(240, 8, 6, 5, rng);
  const FeatureMaps xa = synthetic_backbone(clips, v, dims, 7), xn = synthetic_backbone(clips, n, dims, 7);
  const auto [first, width] = signature_channels(2, 3, dims.d);
  const std::size_t cell = signature_cell(2, 3, 16);
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t c = 0; c < dims.d; ++c) {
      const double diff = xa.tensor().at({t, cell / 4, cell % 4, c}) - xn.tensor().at({t, cell / 4, cell % 4, c});
      const bool in_block = c >= first && c < first + width;
      EXPECT_NEAR(diff, in_block ? 3.0 : 0.0, 1e-12);
    }
  }
}

TEST(Dropout, IdentityCases) {
  Rng rng(7);
  const Tensor x = random_tensor(Shape{5, 3}, rng);
  EXPECT_EQ(dropout(x, 0.0, Mode::train, rng), x);
  EXPECT_EQ(dropout(x, 0.7, Mode::eval, rng), x);
  EXPECT_THROW(dropout(x, 1.0, Mode::train, rng), ConfigError);
  EXPECT_THROW(dropout(x, -0.1, Mode::train, rng), ConfigError);
}

TEST(Dropout, SurvivorsAreDoubledAtHalfRate) {
  Rng rng(8);
  const Tensor x = random_tensor(Shape{1000}, rng, 0.5, 1.5);
  const Tensor y = dropout(x, 0.5, Mode::train, rng);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_TRUE(y[i] == 0.0 || y[i] == 2.0 * x[i]);
}

TEST(Dropout, PreservesExpectation) {
  Rng rng(9);
  const Tensor x = Tensor::scalar(1.7);
  double sum = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) sum += dropout(x, 0.5, Mode::train, rng).item();
  EXPECT_NEAR(sum / trials, 1.7, 0.01 * 1.7);
}

TEST(Hflip, ProbabilityZeroAndInvolution) {
  Rng rng(10);
  const FeatureMaps x(random_tensor(Shape{2, 3, 2, 4}, rng));
  EXPECT_EQ(hflip_augment(x, 0.0, rng).tensor(), x.tensor());
  const FeatureMaps once = hflip_augment(x, 1.0, rng);
  EXPECT_NE(once.tensor(), x.tensor());
  EXPECT_EQ(once.tensor().at({1, 0, 1, 2}), x.tensor().at({1, 2, 1, 2}));
  EXPECT_EQ(hflip_augment(once, 1.0, rng).tensor(), x.tensor());
}

TEST(Adagrad, HandComputedSteps) {
  const Adagrad opt{0.001, 1e-10};
  Tensor theta = Tensor::scalar(1.0);
  std::vector<Tensor> acc{Tensor::scalar(0.0)};
  Tensor* params[] = {&theta};

  opt.step(params, acc, std::vector<Tensor>{Tensor::scalar(0.0)});
  EXPECT_EQ(theta.item(), 1.0);
  EXPECT_EQ(acc[0].item(), 0.0);

  opt.step(params, acc, std::vector<Tensor>{Tensor::scalar(3.0)});
  EXPECT_NEAR(theta.item() - 1.0, -0.001, 1e-12);
  const double after_first = theta.item();
  opt.step(params, acc, std::vector<Tensor>{Tensor::scalar(4.0)});
  EXPECT_EQ(acc[0].item(), 25.0);
  EXPECT_NEAR(theta.item() - after_first, -0.001 * 4.0 / 5.0, 1e-12);
}

TEST(Adagrad, ConstantGradientStepIsLrOverRootN) {
  const Adagrad opt{0.01, 0.0};
  Tensor theta = Tensor::scalar(0.0);
  std::vector<Tensor> acc{Tensor::scalar(0.0)};
  Tensor* params[] = {&theta};
  double prev_acc = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const double before = theta.item();
    opt.step(params, acc, std::vector<Tensor>{Tensor::scalar(-2.5)});
    EXPECT_NEAR(theta.item() - before, 0.01 / std::sqrt(static_cast<double>(n)), 1e-14);
    EXPECT_GE(acc[0].item(), prev_acc);
    prev_acc = acc[0].item();
  }
}

TEST(Adagrad, NonFiniteGradientLeavesEverythingUntouched) {
  const Adagrad opt{0.001, 1e-10};
  Tensor a = Tensor::scalar(1.0), b = Tensor::scalar(2.0);
  std::vector<Tensor> acc{Tensor::scalar(0.0), Tensor::scalar(0.0)};
  Tensor* params[] = {&a, &b};
  Tensor bad = Tensor::scalar(0.0);
  bad[0] = std::numeric_limits<double>::infinity();
  std::vector<Tensor> grads{Tensor::scalar(1.0), bad};
  EXPECT_THROW(opt.step(params, acc, grads), NumericError);
  EXPECT_EQ(a.item(), 1.0);
  EXPECT_EQ(acc[0].item(), 0.0);
}

TEST(Generator, RespectsCountsAndInvariants) {
  const DatasetSpec ds = generate_dataset(GeneratorSpec{});
  EXPECT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.classes, 3u);
  std::size_t normal = 0;
  std::set<std::uint64_t> ids;
  for (const auto& v : ds.videos) {
    ids.insert(v.id);
    normal += v.labels.any() ? 0 : 1;
    EXPECT_EQ(v.spans.empty(), !v.labels.any());
    for (const auto& s : v.spans) {
      EXPECT_LT(s.end, v.frame_count);
      EXPECT_TRUE(v.labels.has(s.cls));
    }
  }
  EXPECT_EQ(normal, 80u);
  EXPECT_EQ(ids.size(), 200u);
  EXPECT_NO_THROW(ds.validate());
  EXPECT_EQ(generate_dataset(GeneratorSpec{}).videos, ds.videos);

  GeneratorSpec test_split;
  test_split.videos = 40;
  test_split.normal = 16;
  test_split.split = Split::test;
  for (const auto& v : generate_dataset(test_split).videos) EXPECT_GE(v.id, kTestIdBase);
}

TEST(Train, SameSeedIsBitIdentical) {
  const DatasetSpec ds = tiny_dataset();
  const TrainResult a = train(ds, quick_config()), b = train(ds, quick_config());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(*a.params.tensors()[i], *b.params.tensors()[i]);
  ASSERT_EQ(a.epochs.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(a.epochs[e].total, b.epochs[e].total);

  TrainConfig other = quick_config();
  other.seed = 8;
  EXPECT_NE(train(ds, other).params.phi2.weight, a.params.phi2.weight);
}

TEST(Train, ZeroEpochsKeepsTheInitialization) {
  const DatasetSpec ds = tiny_dataset();
  TrainConfig cfg = quick_config();
  cfg.epochs = 0;
  const TrainResult r = train(ds, cfg);
  EXPECT_TRUE(r.epochs.empty());
  Rng init = derive_rng(cfg.seed, {1});
  const HeadParams expected = HeadParams::init(ds.classes, cfg.dims.d, init);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(*r.params.tensors()[i], *expected.tensors()[i]);
}

TEST(Train, LossDecreasesOnASmallRun) {
  const DatasetSpec ds = tiny_dataset();
  TrainConfig cfg = quick_config();
  cfg.epochs = 15;
  const TrainResult r = train(ds, cfg);
  EXPECT_LT(r.epochs.back().total, r.epochs.front().total);
  for (const auto& e : r.epochs) {
    EXPECT_NEAR(e.total, e.l_s + e.l_s_star + 0.5 * e.l_g_star + 0.1 * e.l_sparse, 1e-12);
  }
}

TEST(Train, RejectsSingleClassTrainingSets) {
  DatasetSpec ds{3, 7, {normal_video(1, 100), normal_video(2, 100)}};
  EXPECT_THROW(train(ds, quick_config()), ConfigError);
  TrainConfig bad = quick_config();
  bad.dropout = 1.0;
  EXPECT_THROW(train(tiny_dataset(), bad), ConfigError);
}
