#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

// Rebuilds a simulator of the given kind ("optics", "acoustic",
// "microwave") from tensors named prefix + parameter name.
std::unique_ptr<Simulator> simulator_from_tensors(const std::string& kind, const std::vector<Tensor>& tensors,
                                                  const std::string& prefix = "");

void save_system(const std::filesystem::path& path, const Simulator& sys);
std::unique_ptr<Simulator> load_system(const std::filesystem::path& path);

}  // namespace pnn::physical
