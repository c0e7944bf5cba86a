#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnn/core/dataset.hpp"
#include "pnn/core/label_embed.hpp"
#include "pnn/physical/microwave.hpp"

namespace pnn::harness {

enum class Task { Mnist, Vowel };
enum class Method { Mfff, IdealBp, InSilico, PaBp, PerturbRecover };

std::string to_string(Task t);
std::string to_string(Method m);

struct DataConfig {
  std::string dir = "data/mnist";
  int crop = 1;
  int pool = 1;  // average pooling factor applied after cropping
  int n_train = 8000;
  int n_test = 2000;
};

struct BackendConfig {
  std::string kind;  // optics | acoustic | microwave | remote
  std::uint64_t seed = 0;
  std::vector<double> phase_gain;  // optics, per layer
  double weight_scale = 0.0;       // acoustic
  int channels = 20;
  int output_dim = 20;
  std::vector<double> gains;      // empty: built-in table
  std::vector<double> exponents;
  double eta = 0.0;  // microwave
  int elements = 64;
  int frequencies = 20;
  double phase_on = 3.141592653589793;
  physical::PixelEncoding encoding = physical::PixelEncoding::Binary;
  std::vector<std::string> endpoints;  // remote, one host:port per layer
  int timeout_ms = 30000;
};

struct TrainingConfig {
  std::vector<double> theta;  // per layer
  double lr = 1e-3;
  int epochs = 30;
  int n_inter = 16;
  int batch_size = 500;
  int eval_every = 1;
  int train_eval_samples = 1000;
  std::vector<int> include_layers;
};

struct SurrogateConfig {
  std::vector<int> hidden = {100, 200, 100};
  int epochs = 200;
  double lr = 1e-3;
  int batch_size = 128;
  double val_frac = 0.2;
  bool layer_norm = false;
  double dropout = 0.0;
  int n_pairs = 10000;
  int layer = 0;  // which physical layer fit-surrogate models
};

struct BpSection {
  int epochs = 30;
  double lr = 1e-3;
  int batch_size = 64;
  bool allow_relaxed_gradients = false;
  double mismatch_sigma = 0.025;
  std::uint64_t twin_seed = 77;
  std::string backward = "surrogate";  // surrogate | clone | exact
  double clone_sigma = 0.025;
  SurrogateConfig surrogate;
};

struct PerturbationConfig {
  double mu = 0.0;
  std::vector<double> sigmas = {0.5};
  int epochs_pre = 15;
  int epochs_post = 20;
  std::vector<std::uint64_t> seeds = {0};
  double clone_sigma = 0.0;
};

struct DiagnoseConfig {
  int ensemble = 1000;
  int n_train = 1000;
  int n_test = 1000;
};

struct ExperimentConfig {
  Task task = Task::Mnist;
  DataConfig data;
  VowelSpec vowel;
  Method method = Method::Mfff;
  std::uint64_t seed = 0;
  int depth = 0;
  bool skip = false;
  std::vector<int> widths;  // trainable output width per layer, 0 = backend output width
  LabelEmbedSpec embed;
  BackendConfig backend;
  TrainingConfig training;
  BpSection bp;
  SurrogateConfig surrogate;
  PerturbationConfig perturbation;
  DiagnoseConfig diagnose;
  std::string out = "runs/default";
  std::filesystem::path base_dir;  // relative data paths resolve against this
};

// Strict parsing: unknown keys, wrong types and out-of-range values raise
// ConfigError with "<source>:<line>: <field>: ..." and the field path.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Semantic checks shared by every entry point (also run by parse_config).
void validate_config(const ExperimentConfig& cfg);

// Every resolved setting, defaults included. The output directory and the
// base directory are invocation details and are left out.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);
// 16 hex digits of FNV-1a over the compact JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace pnn::harness
