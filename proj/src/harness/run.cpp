#include "pnn/harness/run.hpp"

#include <chrono>
#include <cstdio>

#include "pnn/baselines/bp_trainers.hpp"
#include "pnn/baselines/perturb_recover.hpp"
#include "pnn/core/container.hpp"
#include "pnn/core/error.hpp"
#include "pnn/fftrain/infer.hpp"
#include "pnn/fftrain/trainer.hpp"
#include "pnn/harness/builders.hpp"
#include "pnn/harness/checkpoint.hpp"
#include "pnn/harness/report.hpp"
#include "pnn/physical/diagnostics.hpp"
#include "pnn/physical/server.hpp"
#include "pnn/surrogate/fit.hpp"

namespace pnn::harness {

namespace {

std::filesystem::path out_dir(const ExperimentConfig& cfg) {
  std::filesystem::path p = cfg.out;
  std::filesystem::create_directories(p);
  return p;
}

ReportContext context(const ExperimentConfig& cfg) {
  ReportContext ctx;
  ctx.config = config_to_json(cfg);
  ctx.config_hash = config_hash(cfg);
  ctx.seed = cfg.seed;
  return ctx;
}

nlohmann::json checkpoint_meta(const ExperimentConfig& cfg) {
  return {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"method", to_string(cfg.method)}};
}

fftrain::MfffConfig mfff_config(const ExperimentConfig& cfg) {
  fftrain::MfffConfig m;
  m.epochs = cfg.training.epochs;
  m.n_inter = cfg.training.n_inter;
  m.batch_size = cfg.training.batch_size;
  m.adam.lr = cfg.training.lr;
  m.seed = cfg.seed;
  m.eval_every = cfg.training.eval_every;
  m.train_eval_samples = cfg.training.train_eval_samples;
  m.include_layers = cfg.training.include_layers;
  return m;
}

baselines::BpConfig bp_config(const ExperimentConfig& cfg) {
  baselines::BpConfig b;
  b.epochs = cfg.bp.epochs;
  b.batch_size = cfg.bp.batch_size;
  b.adam.lr = cfg.bp.lr;
  b.seed = cfg.seed;
  b.eval_every = cfg.training.eval_every;
  b.train_eval_samples = cfg.training.train_eval_samples;
  b.allow_relaxed_gradients = cfg.bp.allow_relaxed_gradients;
  return b;
}

surrogate::FitConfig fit_config(const SurrogateConfig& s, std::uint64_t seed) {
  surrogate::FitConfig f;
  f.hidden = s.hidden;
  f.epochs = s.epochs;
  f.lr = s.lr;
  f.batch_size = s.batch_size;
  f.val_frac = s.val_frac;
  f.options.layer_norm = s.layer_norm;
  f.options.dropout = s.dropout;
  f.seed = seed;
  return f;
}

nlohmann::json fit_report_json(const surrogate::FitReport& r) {
  return {{"final_val_mse", r.final_val_mse},
          {"initial_val_mse", r.val_mse.front()},
          {"epochs_run", static_cast<int>(r.val_mse.size()) - 1},
          {"diverged", r.diverged},
          {"message", r.message}};
}

// Backward models for PA-BP, fitted to the inputs each layer receives in
// the initial network when the binding is a surrogate.
baselines::BackwardBinding pa_bp_binding(const ExperimentConfig& cfg, const baselines::BpNetwork& net,
                                         const Dataset& train, nlohmann::json& diagnostics, double clone_sigma,
                                         std::uint64_t seed) {
  const auto backends = net.backends();
  if (cfg.bp.backward == "exact") return baselines::exact_binding(backends);
  if (cfg.bp.backward == "clone") return baselines::clone_binding(backends, clone_sigma, seed + 31);
  const std::size_t n = std::min<std::size_t>(train.size(), static_cast<std::size_t>(cfg.bp.surrogate.n_pairs));
  const baselines::BpForward f = baselines::bp_forward(net, net.prepare_input(train.head(n).features()));
  std::vector<surrogate::FitReport> reports;
  baselines::BackwardBinding b =
      baselines::surrogate_binding(backends, f.inputs, fit_config(cfg.bp.surrogate, seed + 41), &reports);
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& r : reports) fits.push_back(fit_report_json(r));
  diagnostics["surrogate_fits"] = fits;
  return b;
}

nlohmann::json microwave_diagnostics(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < backends.size(); ++l) {
    const auto* mw = dynamic_cast<const physical::MicrowaveSystem*>(backends[l].get());
    if (mw == nullptr) continue;
    const std::uint64_t seed = cfg.backend.seed + 500 + l;
    const Vector k = physical::k_factor(*mw, cfg.diagnose.ensemble, seed);
    const Vector z = physical::linearity_metric(*mw, cfg.diagnose.n_train, cfg.diagnose.n_test, seed + 1);
    layers.push_back({{"layer", l},
                      {"median_k_factor", physical::median(k)},
                      {"median_zeta_db", physical::median(z)}});
  }
  return layers;
}

int finish_run(const ExperimentConfig& cfg, const RunReport& report, ReportContext ctx, const Checkpoint& ckpt,
               std::ostream& log) {
  const std::filesystem::path dir = out_dir(cfg);
  write_json(dir / "report.json", report_to_json(report, ctx));
  write_text_file(dir / "curves.csv", curves_csv(report));
  write_text_file(dir / "confusion.csv", confusion_csv(report));
  save_checkpoint(dir / "checkpoint.pnn", ckpt);
  if (report.status != "ok") {
    log << "run aborted: " << report.message << "\n";
    return kExitRuntime;
  }
  const auto it = report.summary.find("final_test_accuracy");
  if (it != report.summary.end()) log << report.method << ": final test accuracy " << it->second << "\n";
  log << "wrote " << dir.string() << "\n";
  return kExitOk;
}

std::function<void(const EpochRecord&)> epoch_printer(std::ostream& log) {
  return [&log](const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %d  loss %.4g  train %.4f  test %.4f  (%.1fs)\n", r.epoch, r.train_loss,
                  r.train_accuracy, r.test_accuracy, r.seconds);
    log << buf << std::flush;
  };
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.backend) {
    const std::string prefix = "remote:";
    if (o.backend->rfind(prefix, 0) != 0) {
      throw ConfigError("--backend: expected remote:<host:port>[,<host:port>...]", "backend");
    }
    std::vector<std::string> endpoints;
    std::string rest = o.backend->substr(prefix.size());
    std::size_t start = 0;
    while (start <= rest.size()) {
      const std::size_t comma = rest.find(',', start);
      endpoints.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(endpoints.size()) != cfg.depth) {
      throw ConfigError("--backend: " + std::to_string(endpoints.size()) + " endpoint(s) for " +
                            std::to_string(cfg.depth) + " layer(s)",
                        "backend");
    }
    cfg.backend.kind = "remote";
    cfg.backend.endpoints = endpoints;
  }
  validate_config(cfg);
}

int run_train(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.method == Method::PerturbRecover) return run_perturb_recover(cfg, log);
  const TaskData data = load_task(cfg);
  const auto backends = build_backends(cfg, data.train.dim);
  ReportContext ctx = context(cfg);
  if (cfg.backend.kind == "microwave") ctx.diagnostics["microwave"] = microwave_diagnostics(cfg, backends);
  const auto printer = epoch_printer(log);

  if (cfg.method == Method::Mfff) {
    fftrain::FfNetwork net = build_ff_network(cfg, backends, data.train.dim, cfg.seed);
    const RunReport report = fftrain::train_mfff(net, data.train, &data.test, mfff_config(cfg),
                                                 [&](const fftrain::FfNetwork&, const EpochRecord& r) { printer(r); });
    return finish_run(cfg, report, ctx, ff_checkpoint(net, checkpoint_meta(cfg)), log);
  }

  baselines::BpNetwork net = build_bp_network(cfg, backends, data.train.dim, cfg.seed);
  const baselines::BpConfig bc = bp_config(cfg);
  const auto cb = [&](const baselines::BpNetwork&, const EpochRecord& r) { printer(r); };
  RunReport report;
  switch (cfg.method) {
    case Method::IdealBp:
      report = baselines::train_ideal_bp(net, data.train, &data.test, bc, cb);
      break;
    case Method::InSilico:
      report = baselines::train_in_silico(net, data.train, &data.test, bc, cfg.bp.mismatch_sigma, cfg.bp.twin_seed, cb);
      break;
    case Method::PaBp: {
      const auto binding = pa_bp_binding(cfg, net, data.train, ctx.diagnostics, cfg.bp.clone_sigma, cfg.seed);
      report = baselines::train_pa_bp(net, binding, data.train, &data.test, bc, cb);
      break;
    }
    default:
      throw ConfigError("method: not a training method", "method");
  }
  return finish_run(cfg, report, ctx, bp_checkpoint(net, checkpoint_meta(cfg)), log);
}

int run_perturb_recover(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.depth < 2) throw ConfigError("depth: perturb-recover needs depth >= 2", "depth");
  const TaskData data = load_task(cfg);
  const auto backends = build_backends(cfg, data.train.dim);
  ReportContext ctx = context(cfg);

  baselines::PerturbRecoverConfig pc;
  pc.sigmas = cfg.perturbation.sigmas;
  pc.mu = cfg.perturbation.mu;
  pc.epochs_pre = cfg.perturbation.epochs_pre;
  pc.epochs_post = cfg.perturbation.epochs_post;
  pc.seeds = cfg.perturbation.seeds;
  pc.perturb_seed = cfg.seed + 1000;
  pc.mfff = mfff_config(cfg);
  pc.bp = bp_config(cfg);
  pc.backward_clone_sigma = cfg.perturbation.clone_sigma;
  nlohmann::json fits = nlohmann::json::array();
  if (cfg.bp.backward == "surrogate") {
    pc.make_binding = [&](const baselines::BpNetwork& net, const Dataset& train, std::uint64_t seed) {
      nlohmann::json diag;
      auto b = pa_bp_binding(cfg, net, train, diag, 0.0, seed);
      fits.push_back(diag["surrogate_fits"]);
      return b;
    };
  }
  const auto factory = [&](std::uint64_t seed) {
    baselines::PerturbArms arms;
    arms.ff = build_ff_network(cfg, backends, data.train.dim, seed);
    arms.bp = build_bp_network(cfg, backends, data.train.dim, seed);
    log << "seed " << seed << ": training both arms\n" << std::flush;
    return arms;
  };
  const baselines::PerturbRecoverResult result =
      baselines::perturb_recover_experiment(factory, data.train, data.test, pc);
  if (!fits.empty()) ctx.diagnostics["surrogate_fits"] = fits;
  ctx.traces = &result.traces;

  const std::filesystem::path dir = out_dir(cfg);
  write_json(dir / "report.json", report_to_json(result.report, ctx));
  write_text_file(dir / "curves.csv", perturb_curves_csv(result.traces));
  write_text_file(dir / "confusion.csv", confusion_csv(result.report));
  for (const auto& [k, v] : result.report.summary) log << k << " = " << v << "\n";
  log << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int run_eval(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& log) {
  const TaskData data = load_task(cfg);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const std::string kind = ckpt.meta.value("network", "");
  std::vector<int> preds;
  if (kind == "mfff") {
    const fftrain::FfNetwork net = ff_from_checkpoint(ckpt);
    preds = fftrain::infer(net, data.test.features(), cfg.training.include_layers).labels;
  } else if (kind == "bp") {
    preds = baselines::bp_predict(bp_from_checkpoint(ckpt), data.test.features());
  } else {
    throw FormatError(checkpoint.string() + ": unknown network type '" + kind + "'");
  }
  const std::vector<int> labels = data.test.labels();
  RunReport report;
  report.method = "eval:" + kind;
  report.confusion["test"] = confusion_matrix(preds, labels, data.test.n_classes);
  report.summary["test_accuracy"] = accuracy(preds, labels);
  ReportContext ctx = context(cfg);
  ctx.diagnostics["checkpoint"] = checkpoint.string();
  ctx.diagnostics["checkpoint_config_hash"] = ckpt.meta.value("config_hash", "");
  const std::filesystem::path dir = out_dir(cfg);
  write_json(dir / "eval.json", report_to_json(report, ctx));
  write_text_file(dir / "eval_confusion.csv", confusion_csv(report));
  log << "test accuracy " << report.summary["test_accuracy"] << "\n";
  return kExitOk;
}

int run_diagnose(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.backend.kind != "microwave") {
    throw UnsupportedOperation("diagnose needs a microwave backend, config has '" + cfg.backend.kind + "'");
  }
  if (cfg.diagnose.ensemble == 2) {
    log << "warning: an ensemble of 2 configurations makes the K-factor statistically meaningless\n";
  }
  const int width = cfg.embed.output_dim(cfg.task == Task::Vowel ? cfg.vowel.dim : load_task(cfg).train.dim);
  const physical::SimulatorPtr sim = build_simulator(cfg, 0, width);
  const auto& mw = dynamic_cast<const physical::MicrowaveSystem&>(*sim);
  const Vector k = physical::k_factor(mw, cfg.diagnose.ensemble, cfg.seed);
  const Vector z = physical::linearity_metric(mw, cfg.diagnose.n_train, cfg.diagnose.n_test, cfg.seed + 1);
  std::string csv = "freq,K,zeta_db\n";
  char buf[96];
  for (Eigen::Index f = 0; f < k.size(); ++f) {
    // an infinite K (no scattered component) is written as "inf"
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(f), k(f), z(f));
    csv += buf;
  }
  const std::filesystem::path dir = out_dir(cfg);
  write_text_file(dir / "diagnose.csv", csv);
  log << "median K " << physical::median(k) << ", median zeta " << physical::median(z) << " dB\n";
  return kExitOk;
}

Pairs generate_pairs(const ExperimentConfig& cfg, int layer, int n, std::uint64_t seed) {
  if (cfg.backend.kind == "remote") throw UnsupportedOperation("pairs are generated from simulated systems");
  const int in_dim = cfg.task == Task::Vowel ? cfg.vowel.dim : load_task(cfg).train.dim;
  const auto backends = build_backends(cfg, in_dim);
  const physical::BackendPtr& sys = backends.at(static_cast<std::size_t>(layer));
  Rng rng(seed);
  std::normal_distribution<double> n01;
  Pairs p;
  p.x.resize(n, sys->input_dim());
  for (auto& v : p.x.reshaped()) v = n01(rng);
  p.x.rowwise().normalize();
  p.y = sys->forward(p.x);
  return p;
}

int run_gen_data(const ExperimentConfig& cfg, std::ostream& log) {
  const std::filesystem::path dir = out_dir(cfg);
  const TaskData data = load_task(cfg);
  save_dataset_csv(data.train, dir / "train.csv");
  save_dataset_csv(data.test, dir / "test.csv");
  log << "wrote " << data.train.size() << " training and " << data.test.size() << " test samples\n";
  if (cfg.backend.kind != "remote") {
    const Pairs p = generate_pairs(cfg, cfg.surrogate.layer, cfg.surrogate.n_pairs, cfg.seed);
    Container c;
    c.meta_json = nlohmann::json{{"layer", cfg.surrogate.layer}, {"backend", cfg.backend.kind},
                                 {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}}
                      .dump();
    c.tensors = {to_tensor("x", p.x), to_tensor("y", p.y)};
    write_container(dir / "pairs.pnn", c);
    log << "wrote " << p.x.rows() << " input/output pairs of layer " << cfg.surrogate.layer << "\n";
  }
  return kExitOk;
}

int run_fit_surrogate(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& pairs_path,
                      std::ostream& log) {
  Pairs p;
  if (pairs_path) {
    const Container c = read_container(*pairs_path);
    p.x = tensor_to_matrix(find_tensor(c.tensors, "x"));
    p.y = tensor_to_matrix(find_tensor(c.tensors, "y"));
  } else {
    p = generate_pairs(cfg, cfg.surrogate.layer, cfg.surrogate.n_pairs, cfg.seed);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const surrogate::FitResult fit = surrogate::fit_surrogate(p.x, p.y, fit_config(cfg.surrogate, cfg.seed));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir = out_dir(cfg);
  Container c;
  c.meta_json = nlohmann::json{{"network", "surrogate"}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}}.dump();
  c.tensors = fit.model.to_tensors("mlp.");
  write_container(dir / "surrogate.pnn", c);
  std::string csv = "epoch,train_mse,val_mse\n";
  char buf[96];
  for (std::size_t e = 0; e < fit.report.val_mse.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, fit.report.train_mse[e], fit.report.val_mse[e]);
    csv += buf;
  }
  write_text_file(dir / "fit_curve.csv", csv);
  nlohmann::json j = fit_report_json(fit.report);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["n_pairs"] = p.x.rows();
  j["timing"] = {{"seconds", seconds}};
  write_json(dir / "fit.json", j);
  log << "held-out MSE " << fit.report.final_val_mse << " after " << fit.report.val_mse.size() - 1 << " epochs ("
      << seconds << " s)\n";
  return fit.report.diverged ? kExitRuntime : kExitOk;
}

int run_serve_backend(const ExperimentConfig& cfg, int layer, const std::string& host, std::uint16_t port,
                      std::ostream& log) {
  if (layer < 0 || layer >= cfg.depth) throw ConfigError("--layer out of range", "layer");
  if (cfg.backend.kind == "remote") throw ConfigError("backend.kind: cannot serve a remote backend", "backend.kind");
  const int in_dim = cfg.task == Task::Vowel ? cfg.vowel.dim : load_task(cfg).train.dim;
  const auto backends = build_backends(cfg, in_dim);
  physical::BackendServer server(backends.at(static_cast<std::size_t>(layer)), host, port);
  log << "serving layer " << layer << " (" << backends[static_cast<std::size_t>(layer)]->kind() << ") on " << host
      << ":" << server.port() << "\n"
      << std::flush;
  server.run();
  return kExitOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidSpec& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedOperation& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace pnn::harness
