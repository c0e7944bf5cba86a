#include <gtest/gtest.h>

#include <memory>

#include "pnn/baselines/perturb_recover.hpp"
#include "pnn/core/error.hpp"
#include "pnn/physical/optics.hpp"
#include "toy_data.hpp"

using namespace pnn;
using namespace pnn::baselines;

namespace {

PerturbArms optics_arms(std::uint64_t seed, int depth) {
  Rng rng(seed);
  fftrain::FfNetwork ff;
  ff.input_dim = 8;
  ff.embed = LabelEmbedSpec{3, 0, 1.0, EmbedMode::Append};
  for (int l = 0; l < depth; ++l) {
    auto sys = std::make_shared<physical::OpticsSystem>(physical::OpticsSystem::random(11, seed * 10 + l));
    ff.layers.push_back(fftrain::make_ff_layer(sys, 11, 1.0, AdamConfig{}, rng));
  }
  BpNetwork bp = bp_from_ff(ff, AdamConfig{}, rng);
  return {ff, bp};
}

PerturbRecoverConfig small_config() {
  PerturbRecoverConfig cfg;
  cfg.epochs_pre = 3;
  cfg.epochs_post = 3;
  cfg.mfff.n_inter = 5;
  cfg.mfff.batch_size = 0;
  cfg.mfff.adam.lr = 0.02;
  cfg.bp.batch_size = 30;
  cfg.bp.adam.lr = 0.01;
  return cfg;
}

}  // namespace

TEST(RecoveryEpoch, NeedsASustainedWindow) {
  EXPECT_EQ(recovery_epoch({0.5, 0.9, 0.5, 0.89, 0.9, 0.91}, 0.9, 0.02, 3), 4);
  EXPECT_EQ(recovery_epoch({0.9, 0.9, 0.9}, 0.9, 0.02, 3), 1);
  EXPECT_EQ(recovery_epoch({0.5, 0.9, 0.9}, 0.9, 0.02, 3), -1);
  EXPECT_EQ(recovery_epoch({}, 0.9, 0.02, 3), -1);
  EXPECT_EQ(recovery_epoch({0.87}, 0.9, 0.02, 1), -1);
}

TEST(PerturbRecover, ZeroSigmaCausesNoDrop) {
  const auto [train, test] = pnn::testing::class_blobs(150, 60, 8, 3, 1);
  PerturbRecoverConfig cfg = small_config();
  cfg.sigmas = {0.0};
  const auto r = perturb_recover_experiment([](std::uint64_t s) { return optics_arms(s, 2); }, train, test, cfg);
  ASSERT_EQ(r.traces.size(), 2u);
  for (const auto& t : r.traces) {
    EXPECT_EQ(t.perturbed_accuracy, t.pre_accuracy.back()) << t.arm;
    EXPECT_EQ(t.pre_accuracy.size(), 3u);
    EXPECT_EQ(t.post_accuracy.size(), 3u);
  }
  EXPECT_TRUE(r.report.summary.count("mfff/sigma=0/median_final_accuracy"));
  EXPECT_TRUE(r.report.summary.count("pa-bp/sigma=0/median_recovery_epoch"));
}

TEST(PerturbRecover, PerturbationHitsBothArmsAndIsDeterministic) {
  const auto [train, test] = pnn::testing::class_blobs(150, 60, 8, 3, 1);
  PerturbRecoverConfig cfg = small_config();
  cfg.sigmas = {0.0, 2.0};
  cfg.seeds = {1, 2};
  auto factory = [](std::uint64_t s) { return optics_arms(s, 3); };
  const auto a = perturb_recover_experiment(factory, train, test, cfg);
  const auto b = perturb_recover_experiment(factory, train, test, cfg);
  ASSERT_EQ(a.traces.size(), 8u);
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_EQ(a.traces[i].post_accuracy, b.traces[i].post_accuracy);
    EXPECT_EQ(a.traces[i].perturbed_accuracy, b.traces[i].perturbed_accuracy);
  }
  // sigma = 0 and sigma = 2 share pre-training but not the perturbed systems
  EXPECT_EQ(a.traces[0].pre_accuracy, a.traces[2].pre_accuracy);
  EXPECT_NE(a.traces[0].post_accuracy, a.traces[2].post_accuracy);
}

TEST(PerturbRecover, RejectsShallowNetworksAndEmptySweeps) {
  const auto [train, test] = pnn::testing::class_blobs(30, 10, 8, 3, 1);
  PerturbRecoverConfig cfg = small_config();
  try {
    perturb_recover_experiment([](std::uint64_t s) { return optics_arms(s, 1); }, train, test, cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "depth");
  }
  cfg.sigmas.clear();
  EXPECT_THROW(perturb_recover_experiment([](std::uint64_t s) { return optics_arms(s, 2); }, train, test, cfg),
               ConfigError);
}
