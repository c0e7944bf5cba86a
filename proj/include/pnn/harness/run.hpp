#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "pnn/harness/config.hpp"

namespace pnn::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  // "remote:host:port[,host:port...]", one endpoint per layer
  std::optional<std::string> backend;
};

// Applies command-line overrides and re-validates.
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

// Each entry point writes into cfg.out and returns an exit code. Status
// lines go to `log`.
int run_train(const ExperimentConfig& cfg, std::ostream& log);
int run_perturb_recover(const ExperimentConfig& cfg, std::ostream& log);
int run_eval(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& log);
int run_diagnose(const ExperimentConfig& cfg, std::ostream& log);
int run_gen_data(const ExperimentConfig& cfg, std::ostream& log);
int run_fit_surrogate(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& pairs,
                      std::ostream& log);
// Blocks until the process is stopped.
int run_serve_backend(const ExperimentConfig& cfg, int layer, const std::string& host, std::uint16_t port,
                      std::ostream& log);

// Runs `body`, mapping ConfigError / InvalidSpec / UnsupportedOperation to
// kExitConfig and any other exception to kExitRuntime, with the message on
// `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

// Deterministic input/output pairs of one simulated layer: inputs are
// random unit-norm rows.
struct Pairs {
  Matrix x;
  Matrix y;
};
Pairs generate_pairs(const ExperimentConfig& cfg, int layer, int n, std::uint64_t seed);

}  // namespace pnn::harness
