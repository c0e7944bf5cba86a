#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <string>

#include "pnn/core/error.hpp"
#include "pnn/harness/config.hpp"
#include "pnn/harness/run.hpp"

using namespace pnn;
using namespace pnn::harness;

namespace {

const std::string kBase = R"(task: vowel
method: mfff
seed: 0
depth: 2
skip: false
out: runs/a
vowel:
  n_classes: 6
  dim: 20
  n_train: 200
  n_test: 100
  noise_sigma: 0.3
  seed: 7
embed:
  mode: append
  offset: 0
  value: 1.0
backend:
  kind: acoustic
  seed: 100
  weight_scale: 0.3
  channels: 20
  output_dim: 20
training:
  theta: 10.0
  lr: 0.01
  epochs: 3
  n_inter: 5
  batch_size: 0
  eval_every: 1
  train_eval_samples: 1000
bp:
  epochs: 3
  lr: 0.001
  batch_size: 64
  mismatch_sigma: 0.025
  twin_seed: 77
  backward: surrogate
  clone_sigma: 0.025
surrogate:
  epochs: 200
  n_pairs: 10000
perturbation:
  mu: 0.0
  sigmas: [0.5]
  epochs_pre: 15
  epochs_post: 20
diagnose:
  ensemble: 1000
)";

std::string replace_once(const std::string& text, const std::string& from, const std::string& to) {
  const std::size_t at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  EXPECT_EQ(text.find(from, at + 1), std::string::npos) << "ambiguous: " << from;
  std::string out = text;
  out.replace(at, from.size(), to);
  return out;
}

// Parses and returns the ConfigError, failing the test if none is thrown.
ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("");
}

}  // namespace

TEST(Config, BaseParses) {
  const ExperimentConfig cfg = parse_config(kBase);
  EXPECT_EQ(cfg.task, Task::Vowel);
  EXPECT_EQ(cfg.depth, 2);
  EXPECT_EQ(cfg.training.theta, (std::vector<double>{10.0, 10.0}));
  EXPECT_EQ(cfg.embed.mode, EmbedMode::Append);
  EXPECT_EQ(cfg.embed.n_classes, 6);
  EXPECT_DOUBLE_EQ(cfg.backend.weight_scale, 0.3);
}

TEST(Config, UnknownKeyNamesLine) {
  const ConfigError e = parse_error(replace_once(kBase, "  lr: 0.01\n", "  lr: 0.01\n  learning_rate: 0.1\n"));
  EXPECT_EQ(e.field(), "training.learning_rate");
  EXPECT_NE(std::string(e.what()).find("cfg.yaml:27:"), std::string::npos) << e.what();
}

TEST(Config, UnknownTopLevelKey) {
  const ConfigError e = parse_error(kBase + "colour: blue\n");
  EXPECT_EQ(e.field(), "colour");
}

TEST(Config, DepthZeroNamesField) {
  const ConfigError e = parse_error(replace_once(kBase, "depth: 2\n", "depth: 0\n"));
  EXPECT_EQ(e.field(), "depth");
  EXPECT_NE(std::string(e.what()).find("depth"), std::string::npos);
}

TEST(Config, PhysicsParametersHaveNoDefaults) {
  EXPECT_EQ(parse_error(replace_once(kBase, "  weight_scale: 0.3\n", "")).field(), "backend.weight_scale");
  EXPECT_EQ(parse_error(replace_once(kBase, "  kind: acoustic\n", "")).field(), "backend.kind");
  const std::string optics = replace_once(replace_once(kBase, "  kind: acoustic\n", "  kind: optics\n"),
                                          "  weight_scale: 0.3\n  channels: 20\n  output_dim: 20\n", "");
  EXPECT_EQ(parse_error(optics).field(), "backend.phase_gain");
  EXPECT_NO_THROW(parse_config(replace_once(optics, "  seed: 100\n", "  seed: 100\n  phase_gain: [1.0, 2.0]\n")));
}

TEST(Config, PerLayerListLengthChecked) {
  EXPECT_EQ(parse_error(replace_once(kBase, "  theta: 10.0\n", "  theta: [1.0, 2.0, 3.0]\n")).field(),
            "training.theta");
  const ExperimentConfig cfg = parse_config(replace_once(kBase, "  theta: 10.0\n", "  theta: [1.0, 2.0]\n"));
  EXPECT_EQ(cfg.training.theta, (std::vector<double>{1.0, 2.0}));
}

TEST(Config, BadValuesRejected) {
  EXPECT_EQ(parse_error(replace_once(kBase, "task: vowel\n", "task: speech\n")).field(), "task");
  EXPECT_EQ(parse_error(replace_once(kBase, "method: mfff\n", "method: dfa\n")).field(), "method");
  EXPECT_EQ(parse_error(replace_once(kBase, "  lr: 0.01\n", "  lr: fast\n")).field(), "training.lr");
  EXPECT_EQ(parse_error(replace_once(kBase, "  theta: 10.0\n", "  theta: -1.0\n")).field(), "training.theta");
  EXPECT_EQ(parse_error(replace_once(kBase, "  mode: append\n", "  mode: prepend\n")).field(), "embed.mode");
}

TEST(Config, MethodConstraints) {
  const std::string pr = replace_once(kBase, "method: mfff\n", "method: perturb-recover\n");
  EXPECT_NO_THROW(parse_config(pr));
  EXPECT_EQ(parse_error(replace_once(pr, "depth: 2\n", "depth: 1\n")).field(), "depth");

  const std::string mw = replace_once(
      replace_once(kBase, "  weight_scale: 0.3\n  channels: 20\n  output_dim: 20\n", "  eta: 0.7\n"),
      "  kind: acoustic\n", "  kind: microwave\n");
  EXPECT_NO_THROW(parse_config(mw));
  const std::string mw_bp = replace_once(mw, "method: mfff\n", "method: ideal-bp\n");
  EXPECT_EQ(parse_error(mw_bp).field(), "bp.allow_relaxed_gradients");
  EXPECT_NO_THROW(parse_config(replace_once(mw_bp, "  epochs: 3\n  lr: 0.001\n",
                                            "  epochs: 3\n  lr: 0.001\n  allow_relaxed_gradients: true\n")));
}

TEST(Config, HashIsStableAndHex) {
  const std::string h = config_hash(parse_config(kBase));
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(h, config_hash(parse_config(kBase)));
  // The output directory is where a run goes, not what it computes.
  EXPECT_EQ(h, config_hash(parse_config(replace_once(kBase, "out: runs/a\n", "out: runs/b\n"))));
  // Spelling out a default does not change the experiment.
  EXPECT_EQ(h, config_hash(parse_config(replace_once(kBase, "  ensemble: 1000\n", "  ensemble: 1000\n  n_train: 1000\n"))));
}

TEST(Config, HashDetectsEveryFieldChange) {
  const std::vector<std::pair<std::string, std::string>> edits = {
      {"method: mfff\n", "method: ideal-bp\n"},
      {"seed: 0\n", "seed: 1\n"},
      {"depth: 2\n", "depth: 3\n"},
      {"skip: false\n", "skip: true\n"},
      {"  n_classes: 6\n", "  n_classes: 5\n"},
      {"  dim: 20\n", "  dim: 21\n"},
      {"  n_train: 200\n", "  n_train: 201\n"},
      {"  n_test: 100\n", "  n_test: 101\n"},
      {"  noise_sigma: 0.3\n", "  noise_sigma: 0.31\n"},
      {"  seed: 7\n", "  seed: 8\n"},
      {"  mode: append\n", "  mode: overwrite\n"},
      {"  offset: 0\n", "  offset: 1\n"},
      {"  value: 1.0\n", "  value: 2.0\n"},
      {"  seed: 100\n", "  seed: 101\n"},
      {"  weight_scale: 0.3\n", "  weight_scale: 0.30000000000000004\n"},
      {"  channels: 20\n", "  channels: 21\n"},
      {"  output_dim: 20\n", "  output_dim: 19\n"},
      {"  theta: 10.0\n", "  theta: [10.0, 11.0]\n"},
      {"  lr: 0.01\n", "  lr: 0.02\n"},
      {"  epochs: 3\n  n_inter", "  epochs: 4\n  n_inter"},
      {"  n_inter: 5\n", "  n_inter: 6\n"},
      {"  batch_size: 0\n", "  batch_size: 10\n"},
      {"  eval_every: 1\n", "  eval_every: 2\n"},
      {"  train_eval_samples: 1000\n", "  train_eval_samples: 999\n"},
      {"  epochs: 3\n  lr: 0.001\n", "  epochs: 5\n  lr: 0.001\n"},
      {"  lr: 0.001\n", "  lr: 0.002\n"},
      {"  batch_size: 64\n", "  batch_size: 32\n"},
      {"  mismatch_sigma: 0.025\n", "  mismatch_sigma: 0.05\n"},
      {"  twin_seed: 77\n", "  twin_seed: 78\n"},
      {"  backward: surrogate\n", "  backward: clone\n"},
      {"  clone_sigma: 0.025\n", "  clone_sigma: 0.01\n"},
      {"  epochs: 200\n", "  epochs: 201\n"},
      {"  n_pairs: 10000\n", "  n_pairs: 9999\n"},
      {"  mu: 0.0\n", "  mu: 0.1\n"},
      {"  sigmas: [0.5]\n", "  sigmas: [0.5, 1.0]\n"},
      {"  epochs_pre: 15\n", "  epochs_pre: 16\n"},
      {"  epochs_post: 20\n", "  epochs_post: 21\n"},
      {"  ensemble: 1000\n", "  ensemble: 999\n"},
  };
  std::set<std::string> hashes = {config_hash(parse_config(kBase))};
  for (const auto& [from, to] : edits) {
    const std::string h = config_hash(parse_config(replace_once(kBase, from, to)));
    EXPECT_TRUE(hashes.insert(h).second) << "hash unchanged by: " << to;
  }
}

TEST(Config, Fnv1aReferenceValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Config, OverridesApply) {
  ExperimentConfig cfg = parse_config(kBase);
  apply_overrides(cfg, Overrides{42, std::string("elsewhere"), std::string("remote:10.0.0.1:5000,10.0.0.2:5001")});
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.out, "elsewhere");
  EXPECT_EQ(cfg.backend.kind, "remote");
  EXPECT_EQ(cfg.backend.endpoints, (std::vector<std::string>{"10.0.0.1:5000", "10.0.0.2:5001"}));

  ExperimentConfig one = parse_config(kBase);
  EXPECT_THROW(apply_overrides(one, Overrides{{}, {}, std::string("remote:10.0.0.1:5000")}), ConfigError);
  EXPECT_THROW(apply_overrides(one, Overrides{{}, {}, std::string("optics")}), ConfigError);
}

TEST(Config, JsonRecordsDefaults) {
  const nlohmann::json j = config_to_json(parse_config(R"(task: vowel
method: mfff
depth: 1
backend: {kind: acoustic, weight_scale: 1.0}
)"));
  EXPECT_EQ(j.at("training").at("n_inter"), 16);
  EXPECT_EQ(j.at("bp").at("mismatch_sigma"), 0.025);
  EXPECT_FALSE(j.contains("out"));
}

TEST(Config, ShippedConfigsLoad) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(PNN_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".yaml") continue;
    SCOPED_TRACE(entry.path().string());
    const ExperimentConfig cfg = load_config(entry.path());
    EXPECT_EQ(cfg.base_dir, std::filesystem::path(PNN_SOURCE_DIR) / "configs");
    ++n;
  }
  EXPECT_GE(n, 7);
}
