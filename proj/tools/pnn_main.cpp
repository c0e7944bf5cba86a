#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pnn/harness/config.hpp"
#include "pnn/harness/run.hpp"

namespace {

using namespace pnn::harness;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> backend;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (YAML)")->required();
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--backend", c.backend, "remote:<host:port>[,<host:port>...], one endpoint per layer");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  apply_overrides(cfg, Overrides{c.seed, c.out, c.backend});
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pnn: physical neural networks trained with model-free forward-forward"};
  app.require_subcommand(1);

  Common c;
  std::string checkpoint;
  std::optional<std::string> pairs;
  int layer = 0;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  auto* gen = app.add_subcommand("gen-data", "write the task dataset and simulator input/output pairs");
  auto* fit = app.add_subcommand("fit-surrogate", "fit an MLP surrogate to one physical layer");
  auto* train = app.add_subcommand("train", "train with the configured method");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* pr = app.add_subcommand("perturb-recover", "perturb trained networks and track recovery");
  auto* diag = app.add_subcommand("diagnose", "K-factor and linearity tables of a microwave backend");
  auto* serve = app.add_subcommand("serve-backend", "serve one simulated layer over TCP");
  for (auto* cmd : {gen, fit, train, eval, pr, diag, serve}) add_common(cmd, c);
  eval->add_option("--checkpoint", checkpoint, "checkpoint.pnn written by train")->required();
  fit->add_option("--pairs", pairs, "pairs.pnn written by gen-data (default: generate)");
  serve->add_option("--layer", layer, "layer index to serve");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  return guarded(
      [&]() -> int {
        ExperimentConfig cfg = load(c);
        std::ostream& log = std::cout;
        if (*gen) return run_gen_data(cfg, log);
        if (*fit) return run_fit_surrogate(cfg, pairs ? std::optional<std::filesystem::path>(*pairs) : std::nullopt, log);
        if (*train) return run_train(cfg, log);
        if (*eval) return run_eval(cfg, checkpoint, log);
        if (*pr) {
          cfg.method = Method::PerturbRecover;
          validate_config(cfg);
          return run_perturb_recover(cfg, log);
        }
        if (*diag) return run_diagnose(cfg, log);
        return run_serve_backend(cfg, layer, host, port, log);
      },
      std::cerr);
}
