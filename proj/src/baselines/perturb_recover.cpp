#include "pnn/baselines/perturb_recover.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "pnn/core/error.hpp"
#include "pnn/core/metrics.hpp"
#include "pnn/fftrain/infer.hpp"
#include "pnn/physical/diagnostics.hpp"

namespace pnn::baselines {

namespace {

double ff_test_accuracy(const fftrain::FfNetwork& net, const Dataset& test, const std::vector<int>& include) {
  const fftrain::InferResult r = fftrain::infer(net, test.features(), include);
  return accuracy(r.labels, test.labels());
}

double tail_mean(const std::vector<double>& v, int window) {
  const auto n = std::min<std::size_t>(v.size(), static_cast<std::size_t>(std::max(window, 1)));
  if (n == 0) return 0.0;
  return std::accumulate(v.end() - static_cast<std::ptrdiff_t>(n), v.end(), 0.0) / static_cast<double>(n);
}

std::vector<double> test_series(const RunReport& r) {
  std::vector<double> out;
  for (const auto& e : r.epochs) out.push_back(e.test_accuracy);
  return out;
}

std::vector<physical::BackendPtr> perturbed_systems(const std::vector<physical::BackendPtr>& systems, double mu,
                                                    double sigma, std::uint64_t seed) {
  std::vector<physical::BackendPtr> out;
  for (std::size_t l = 0; l < systems.size(); ++l) {
    const physical::Simulator* sim = physical::as_simulator(*systems[l]);
    if (sim == nullptr) throw UnsupportedOperation("perturb-recover needs simulated systems");
    const double scale = sim->parameter_std();
    out.push_back(physical::perturb(*systems[l], mu * scale, sigma * scale, seed + 7919 * l));
  }
  return out;
}

double median_of(const std::vector<double>& v) {
  return physical::median(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check_result(const RunReport& r, const std::string& what) {
  if (r.status != "ok") throw BackendError(what + ": " + r.message);
}

}  // namespace

int recovery_epoch(const std::vector<double>& accuracy, double reference, double tolerance, int window) {
  const int n = static_cast<int>(accuracy.size());
  const int w = std::max(window, 1);
  for (int start = 0; start + w <= n; ++start) {
    bool ok = true;
    for (int k = start; k < start + w && ok; ++k) ok = accuracy[static_cast<std::size_t>(k)] >= reference - tolerance;
    if (ok) return start + 1;
  }
  return -1;
}

PerturbRecoverResult perturb_recover_experiment(const ArmFactory& factory, const Dataset& train, const Dataset& test,
                                                const PerturbRecoverConfig& cfg) {
  if (cfg.sigmas.empty()) throw ConfigError("at least one sigma is required", "perturbation.sigmas");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
  if (cfg.epochs_pre < 1 || cfg.epochs_post < 1) throw ConfigError("pre and post epochs must be positive", "epochs");
  for (double s : cfg.sigmas) {
    if (!(s >= 0.0)) throw ConfigError("sigma must be non-negative", "perturbation.sigmas");
  }

  fftrain::MfffConfig mfff = cfg.mfff;
  mfff.eval_every = 1;
  BpConfig bp = cfg.bp;
  bp.eval_every = 1;

  PerturbRecoverResult result;
  result.report.method = "perturb-recover";
  for (std::uint64_t seed : cfg.seeds) {
    const PerturbArms arms = factory(seed);
    if (arms.ff.layers.size() < 2) throw ConfigError("perturb-recover needs depth >= 2", "depth");
    const std::vector<physical::BackendPtr> systems = arms.bp.backends();

    fftrain::FfNetwork ff_pre = arms.ff;
    BpNetwork bp_pre = arms.bp;
    std::vector<double> ff_pre_acc, bp_pre_acc;
    // stale digital models of the unperturbed systems
    const BackwardBinding binding = cfg.make_binding ? cfg.make_binding(arms.bp, train, seed)
                                                     : clone_binding(systems, cfg.backward_clone_sigma, seed + 31);
    if (cfg.run_mfff) {
      mfff.epochs = cfg.epochs_pre;
      mfff.seed = seed;
      const RunReport r = fftrain::train_mfff(ff_pre, train, &test, mfff);
      check_result(r, "mfff pre-training");
      ff_pre_acc = test_series(r);
    }
    if (cfg.run_pa_bp) {
      bp.epochs = cfg.epochs_pre;
      bp.seed = seed;
      const RunReport r = train_pa_bp(bp_pre, binding, train, &test, bp);
      check_result(r, "pa-bp pre-training");
      bp_pre_acc = test_series(r);
    }

    for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
      const double sigma = cfg.sigmas[si];
      const std::uint64_t post_seed = seed + 1 + 101 * si;
      const std::vector<physical::BackendPtr> hit =
          perturbed_systems(systems, cfg.mu, sigma, cfg.perturb_seed + 7 * seed + 13 * si);
      if (cfg.run_mfff) {
        fftrain::FfNetwork net = ff_pre;
        for (std::size_t l = 0; l < hit.size(); ++l) net.layers[l].backend = hit[l];
        ArmTrace t;
        t.arm = "mfff";
        t.sigma = sigma;
        t.seed = seed;
        t.pre_accuracy = ff_pre_acc;
        t.pre_level = tail_mean(ff_pre_acc, cfg.pre_window);
        t.perturbed_accuracy = ff_test_accuracy(net, test, mfff.include_layers);
        mfff.epochs = cfg.epochs_post;
        mfff.seed = post_seed;
        const RunReport r = fftrain::train_mfff(net, train, &test, mfff);
        check_result(r, "mfff post-perturbation");
        t.post_accuracy = test_series(r);
        t.recovery_epoch = recovery_epoch(t.post_accuracy, t.pre_level, cfg.recovery_tolerance, cfg.recovery_window);
        t.final_accuracy = t.post_accuracy.back();
        result.traces.push_back(std::move(t));
      }
      if (cfg.run_pa_bp) {
        BpNetwork net = with_backends(bp_pre, hit);
        ArmTrace t;
        t.arm = "pa-bp";
        t.sigma = sigma;
        t.seed = seed;
        t.pre_accuracy = bp_pre_acc;
        t.pre_level = tail_mean(bp_pre_acc, cfg.pre_window);
        t.perturbed_accuracy = bp_accuracy(net, test);
        bp.epochs = cfg.epochs_post;
        bp.seed = post_seed;
        const RunReport r = train_pa_bp(net, binding, train, &test, bp);
        check_result(r, "pa-bp post-perturbation");
        t.post_accuracy = test_series(r);
        t.recovery_epoch = recovery_epoch(t.post_accuracy, t.pre_level, cfg.recovery_tolerance, cfg.recovery_window);
        t.final_accuracy = t.post_accuracy.back();
        result.traces.push_back(std::move(t));
      }
    }
  }

  // medians over seeds; an arm that never recovers counts as epochs_post + 1
  for (const std::string arm : {"mfff", "pa-bp"}) {
    for (double sigma : cfg.sigmas) {
      std::vector<double> pre, hit, fin, rec;
      for (const auto& t : result.traces) {
        if (t.arm != arm || t.sigma != sigma) continue;
        pre.push_back(t.pre_level);
        hit.push_back(t.perturbed_accuracy);
        fin.push_back(t.final_accuracy);
        rec.push_back(t.recovery_epoch < 0 ? cfg.epochs_post + 1 : t.recovery_epoch);
      }
      if (pre.empty()) continue;
      const std::string key = arm + "/sigma=" + fmt(sigma) + "/";
      result.report.summary[key + "median_pre_accuracy"] = median_of(pre);
      result.report.summary[key + "median_perturbed_accuracy"] = median_of(hit);
      result.report.summary[key + "median_final_accuracy"] = median_of(fin);
      result.report.summary[key + "median_recovery_epoch"] = median_of(rec);
    }
  }
  return result;
}

}  // namespace pnn::baselines
