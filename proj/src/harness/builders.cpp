#include "pnn/harness/builders.hpp"

#include <cmath>

#include "pnn/core/error.hpp"
#include "pnn/physical/acoustic.hpp"
#include "pnn/physical/microwave.hpp"
#include "pnn/physical/optics.hpp"
#include "pnn/physical/remote.hpp"

namespace pnn::harness {

Dataset pool_images(const Dataset& data, int factor) {
  if (factor < 1) throw InvalidSpec("pool factor must be positive");
  if (factor == 1) return data;
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(data.dim))));
  if (side * side != data.dim) throw InvalidSpec("pooling needs square images, got dim " + std::to_string(data.dim));
  const int out_side = side / factor;
  if (out_side < 1) throw InvalidSpec("pool factor larger than the image");
  Dataset out;
  out.n_classes = data.n_classes;
  out.dim = out_side * out_side;
  out.split = data.split;
  out.samples.reserve(data.size());
  const double inv = 1.0 / (factor * factor);
  for (const Sample& s : data.samples) {
    Sample p;
    p.label = s.label;
    p.features = Vector::Zero(out.dim);
    for (int r = 0; r < out_side * factor; ++r) {
      for (int c = 0; c < out_side * factor; ++c) {
        p.features((r / factor) * out_side + c / factor) += inv * s.features(r * side + c);
      }
    }
    out.samples.push_back(std::move(p));
  }
  return out;
}

TaskData load_task(const ExperimentConfig& cfg) {
  if (cfg.task == Task::Vowel) {
    auto [train, test] = gen_vowel_dataset(cfg.vowel);
    return {std::move(train), std::move(test)};
  }
  std::filesystem::path dir = cfg.data.dir;
  // Relative paths: the working directory first, then the config file's
  // directory and its ancestors.
  if (dir.is_relative() && !std::filesystem::exists(dir) && !cfg.base_dir.empty()) {
    for (std::filesystem::path base = std::filesystem::absolute(cfg.base_dir);; base = base.parent_path()) {
      if (std::filesystem::exists(base / dir)) {
        dir = base / dir;
        break;
      }
      if (base == base.parent_path()) break;
    }
  }
  auto load = [&](const std::string& stem, Split split, int n) {
    const Dataset d = load_mnist_idx(dir / (stem + "-images-idx3-ubyte.gz"), dir / (stem + "-labels-idx1-ubyte.gz"),
                                     cfg.data.crop, split);
    return pool_images(d.head(static_cast<std::size_t>(n)), cfg.data.pool);
  };
  return {load("train", Split::Train, cfg.data.n_train), load("t10k", Split::Test, cfg.data.n_test)};
}

physical::SimulatorPtr build_simulator(const ExperimentConfig& cfg, int layer, int input_width) {
  const BackendConfig& b = cfg.backend;
  const std::uint64_t seed = b.seed + static_cast<std::uint64_t>(layer);
  if (b.kind == "optics") {
    return std::make_shared<physical::OpticsSystem>(
        physical::OpticsSystem::random(input_width, seed, b.phase_gain.at(static_cast<std::size_t>(layer))));
  }
  if (b.kind == "acoustic") {
    physical::AcousticSpec spec;
    spec.input_dim = input_width;
    spec.channels = b.channels;
    spec.output_dim = b.output_dim;
    spec.weight_scale = b.weight_scale;
    if (!b.gains.empty()) {
      spec.gains = b.gains;
      spec.exponents = b.exponents;
    }
    spec.seed = seed;
    return std::make_shared<physical::AcousticSystem>(physical::AcousticSystem::random(spec));
  }
  if (b.kind == "microwave") {
    if (input_width > b.elements) {
      throw ConfigError("backend.elements: layer " + std::to_string(layer) + " needs " + std::to_string(input_width) +
                            " tunable elements, only " + std::to_string(b.elements) + " exist",
                        "backend.elements");
    }
    physical::MicrowaveSpec spec;
    spec.elements = b.elements;
    spec.input_dim = input_width;
    spec.frequencies = b.frequencies;
    spec.eta = b.eta;
    spec.phase_on = b.phase_on;
    spec.encoding = b.encoding;
    spec.seed = seed;
    return std::make_shared<physical::MicrowaveSystem>(physical::MicrowaveSystem::random(spec));
  }
  throw ConfigError("backend.kind: '" + b.kind + "' is not simulated", "backend.kind");
}

std::vector<physical::BackendPtr> build_backends(const ExperimentConfig& cfg, int input_dim) {
  std::vector<physical::BackendPtr> out;
  const int x0_width = cfg.embed.output_dim(input_dim);
  int prev = 0;
  for (int l = 0; l < cfg.depth; ++l) {
    const int in = l == 0 ? x0_width : prev + (cfg.skip ? x0_width : 0);
    physical::BackendPtr b;
    if (cfg.backend.kind == "remote") {
      const auto [host, port] = physical::parse_endpoint(cfg.backend.endpoints.at(static_cast<std::size_t>(l)));
      b = std::make_shared<physical::RemoteSystem>(host, port, cfg.backend.timeout_ms);
      if (b->input_dim() != in) {
        throw ConfigError("backend.endpoints[" + std::to_string(l) + "]: remote system takes " +
                              std::to_string(b->input_dim()) + " inputs, layer " + std::to_string(l) + " supplies " +
                              std::to_string(in),
                          "backend.endpoints");
      }
    } else {
      b = build_simulator(cfg, l, in);
    }
    const int w = cfg.widths.at(static_cast<std::size_t>(l));
    prev = w > 0 ? w : b->output_dim();
    out.push_back(std::move(b));
  }
  return out;
}

LayerShapes layer_shapes(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends) {
  LayerShapes s;
  for (std::size_t l = 0; l < backends.size(); ++l) {
    s.backend_input.push_back(backends[l]->input_dim());
    s.backend_output.push_back(backends[l]->output_dim());
    const int w = cfg.widths.at(l);
    s.width.push_back(w > 0 ? w : backends[l]->output_dim());
  }
  return s;
}

fftrain::FfNetwork build_ff_network(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends,
                                    int input_dim, std::uint64_t seed) {
  Rng rng(seed);
  fftrain::FfNetwork net;
  net.input_dim = input_dim;
  net.skip = cfg.skip;
  net.embed = cfg.embed;
  AdamConfig adam;
  adam.lr = cfg.training.lr;
  const LayerShapes shapes = layer_shapes(cfg, backends);
  for (std::size_t l = 0; l < backends.size(); ++l) {
    net.layers.push_back(fftrain::make_ff_layer(backends[l], shapes.width[l], cfg.training.theta.at(l), adam, rng));
  }
  net.validate();
  return net;
}

baselines::BpNetwork build_bp_network(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends,
                                      int input_dim, std::uint64_t seed) {
  const fftrain::FfNetwork ff = build_ff_network(cfg, backends, input_dim, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  AdamConfig adam;
  adam.lr = cfg.bp.lr;
  baselines::BpNetwork net = baselines::bp_from_ff(ff, adam, rng);
  net.validate();
  return net;
}

}  // namespace pnn::harness
