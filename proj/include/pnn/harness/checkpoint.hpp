#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "pnn/baselines/bp_network.hpp"
#include "pnn/core/tensor.hpp"
#include "pnn/fftrain/network.hpp"

namespace pnn::harness {

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<Tensor> tensors;
};

// Atomic write (temporary file + rename). Loading reports format errors
// with the byte offset.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Trained weights plus every simulated system, so a checkpoint evaluates
// on exactly the systems it was trained on. Remote layers store their
// endpoint and reconnect on load. Optimizer state is not kept.
Checkpoint ff_checkpoint(const fftrain::FfNetwork& net, nlohmann::json extra_meta = nlohmann::json::object());
Checkpoint bp_checkpoint(const baselines::BpNetwork& net, nlohmann::json extra_meta = nlohmann::json::object());
fftrain::FfNetwork ff_from_checkpoint(const Checkpoint& ckpt);
baselines::BpNetwork bp_from_checkpoint(const Checkpoint& ckpt);

}  // namespace pnn::harness
