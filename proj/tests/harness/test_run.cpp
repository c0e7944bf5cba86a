#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mocks.hpp"
#include "pnn/core/container.hpp"
#include "pnn/core/error.hpp"
#include "pnn/harness/checkpoint.hpp"
#include "pnn/harness/run.hpp"
#include "pnn/physical/server.hpp"

using namespace pnn;
using namespace pnn::harness;
namespace fs = std::filesystem;

namespace {

const std::string kVowel = R"(task: vowel
method: mfff
seed: 3
depth: 2
vowel: {dim: 12, n_train: 120, n_test: 60}
embed: {mode: append}
backend: {kind: acoustic, seed: 100, weight_scale: 0.5, output_dim: 12}
training: {theta: 10.0, lr: 0.01, epochs: 4, n_inter: 10, batch_size: 0}
bp: {epochs: 3, lr: 0.003, batch_size: 32, surrogate: {epochs: 20, n_pairs: 100}}
)";

ExperimentConfig config(const std::string& extra, const std::string& out) {
  ExperimentConfig cfg = parse_config(kVowel + extra);
  const fs::path dir = fs::temp_directory_path() / ("pnn_run_" + out);
  fs::remove_all(dir);
  cfg.out = dir.string();
  return cfg;
}

ExperimentConfig with_method(const std::string& method, const std::string& out) {
  ExperimentConfig cfg = config("", out);
  cfg.method = method == "ideal-bp"    ? Method::IdealBp
               : method == "in-silico" ? Method::InSilico
               : method == "pa-bp"     ? Method::PaBp
                                       : Method::Mfff;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  EXPECT_TRUE(in.good()) << p;
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

long line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return std::count(s.begin(), s.end(), '\n');
}

}  // namespace

TEST(Run, MfffWritesEveryArtifact) {
  const ExperimentConfig cfg = config("", "mfff");
  std::ostringstream log;
  ASSERT_EQ(run_train(cfg, log), kExitOk) << log.str();
  for (const char* f : {"report.json", "curves.csv", "confusion.csv", "checkpoint.pnn"}) {
    EXPECT_TRUE(fs::exists(fs::path(cfg.out) / f)) << f;
  }
  const nlohmann::json r = read_json(fs::path(cfg.out) / "report.json");
  EXPECT_EQ(r.at("status"), "ok");
  EXPECT_EQ(r.at("method"), "mfff");
  EXPECT_EQ(r.at("config_hash"), config_hash(cfg));
  EXPECT_EQ(r.at("seed"), 3);
  EXPECT_EQ(r.at("epochs").size(), 4u);
  EXPECT_EQ(r.at("timing").at("epoch_seconds").size(), 4u);
  const std::string curves = slurp(fs::path(cfg.out) / "curves.csv");
  EXPECT_EQ(curves.rfind("epoch,split,accuracy,loss\n", 0), 0u);
}

TEST(Run, RerunIsIdempotent) {
  const ExperimentConfig a = config("", "idem_a");
  ExperimentConfig b = a;
  b.out = (fs::temp_directory_path() / "pnn_run_idem_b").string();
  fs::remove_all(b.out);
  std::ostringstream log;
  ASSERT_EQ(run_train(a, log), kExitOk);
  ASSERT_EQ(run_train(b, log), kExitOk);
  const fs::path da = a.out, db = b.out;
  EXPECT_EQ(slurp(da / "curves.csv"), slurp(db / "curves.csv"));
  EXPECT_EQ(slurp(da / "confusion.csv"), slurp(db / "confusion.csv"));
  EXPECT_EQ(slurp(da / "checkpoint.pnn"), slurp(db / "checkpoint.pnn"));
  nlohmann::json ra = read_json(da / "report.json"), rb = read_json(db / "report.json");
  ra.erase("timing");
  rb.erase("timing");
  EXPECT_EQ(ra, rb);
}

TEST(Run, SeedOverrideChangesTheRun) {
  ExperimentConfig a = config("", "seed_a"), b = config("", "seed_b");
  apply_overrides(b, Overrides{4, {}, {}});
  std::ostringstream log;
  ASSERT_EQ(run_train(a, log), kExitOk);
  ASSERT_EQ(run_train(b, log), kExitOk);
  EXPECT_NE(slurp(fs::path(a.out) / "checkpoint.pnn"), slurp(fs::path(b.out) / "checkpoint.pnn"));
  EXPECT_NE(read_json(fs::path(a.out) / "report.json").at("config_hash"),
            read_json(fs::path(b.out) / "report.json").at("config_hash"));
}

TEST(Run, EvalReproducesFinalAccuracy) {
  for (const char* method : {"mfff", "ideal-bp"}) {
    const ExperimentConfig cfg = with_method(method, std::string("eval_") + method);
    std::ostringstream log;
    ASSERT_EQ(run_train(cfg, log), kExitOk);
    ASSERT_EQ(run_eval(cfg, fs::path(cfg.out) / "checkpoint.pnn", log), kExitOk);
    const double trained =
        read_json(fs::path(cfg.out) / "report.json").at("summary").at("final_test_accuracy").get<double>();
    const double evaluated = read_json(fs::path(cfg.out) / "eval.json").at("summary").at("test_accuracy").get<double>();
    EXPECT_EQ(trained, evaluated) << method;
  }
}

TEST(Run, BpFamilyMethodsRun) {
  for (const char* method : {"ideal-bp", "in-silico", "pa-bp"}) {
    const ExperimentConfig cfg = with_method(method, std::string("bp_") + method);
    std::ostringstream log;
    ASSERT_EQ(run_train(cfg, log), kExitOk) << method;
    const nlohmann::json r = read_json(fs::path(cfg.out) / "report.json");
    EXPECT_EQ(r.at("method"), method);
    EXPECT_EQ(r.at("epochs").size(), 3u);
  }
  const nlohmann::json pa = read_json(fs::temp_directory_path() / "pnn_run_bp_pa-bp" / "report.json");
  EXPECT_EQ(pa.at("diagnostics").at("surrogate_fits").size(), 2u);
  const nlohmann::json is = read_json(fs::temp_directory_path() / "pnn_run_bp_in-silico" / "report.json");
  EXPECT_TRUE(is.at("summary").contains("final_twin_test_accuracy"));
}

TEST(Run, ExactPaBpCurvesEqualIdealBp) {
  ExperimentConfig pa = with_method("pa-bp", "exact_pa");
  pa.bp.backward = "exact";
  const ExperimentConfig ideal = with_method("ideal-bp", "exact_ideal");
  std::ostringstream log;
  ASSERT_EQ(run_train(pa, log), kExitOk);
  ASSERT_EQ(run_train(ideal, log), kExitOk);
  EXPECT_EQ(slurp(fs::path(pa.out) / "curves.csv"), slurp(fs::path(ideal.out) / "curves.csv"));
  EXPECT_EQ(read_json(fs::path(pa.out) / "report.json").at("loss_trace"),
            read_json(fs::path(ideal.out) / "report.json").at("loss_trace"));
}

TEST(Run, BackendFailureLeavesAbortedPartialReport) {
  // Layer input is 12 features + 6 appended label slots; the mock fails
  // after the first outer epoch's two forward passes and its evaluation.
  auto flaky = std::make_shared<pnn::testing::FlakyBackend>(18, 4);
  physical::BackendServer server(flaky);
  server.start();
  ExperimentConfig cfg = config("", "aborted");
  cfg.depth = 1;
  cfg.training.theta = {10.0};
  cfg.widths = {0};
  apply_overrides(cfg, Overrides{{}, {}, "remote:127.0.0.1:" + std::to_string(server.port())});
  std::ostringstream log;
  EXPECT_EQ(run_train(cfg, log), kExitRuntime);
  const nlohmann::json r = read_json(fs::path(cfg.out) / "report.json");
  EXPECT_EQ(r.at("status"), "aborted");
  EXPECT_NE(r.at("message").get<std::string>().find("simulated link failure"), std::string::npos) << r.at("message");
  EXPECT_LT(r.at("epochs").size(), 4u);
  server.stop();
}

TEST(Run, PerturbRecoverWritesTraces) {
  ExperimentConfig cfg = config("", "perturb");
  cfg.method = Method::PerturbRecover;
  cfg.bp.backward = "clone";
  cfg.perturbation.epochs_pre = 3;
  cfg.perturbation.epochs_post = 3;
  cfg.perturbation.sigmas = {0.0, 0.5};
  validate_config(cfg);
  std::ostringstream log;
  ASSERT_EQ(run_train(cfg, log), kExitOk) << log.str();
  const nlohmann::json r = read_json(fs::path(cfg.out) / "report.json");
  EXPECT_EQ(r.at("traces").size(), 4u);  // two arms x two sigmas x one seed
  EXPECT_TRUE(r.at("summary").contains("mfff/sigma=0.5/median_final_accuracy"));
  const std::string curves = slurp(fs::path(cfg.out) / "curves.csv");
  EXPECT_NE(curves.find(",pa-bp/sigma=0.5/seed=0,"), std::string::npos);
  EXPECT_NE(curves.find("3.5,mfff/sigma=0.5/seed=0,"), std::string::npos);
}

TEST(Run, DiagnoseNeedsMicrowave) {
  const ExperimentConfig cfg = config("", "diag_bad");
  std::ostringstream log, err;
  EXPECT_EQ(guarded([&] { return run_diagnose(cfg, log); }, err), kExitConfig);
  EXPECT_NE(err.str().find("microwave"), std::string::npos);
}

TEST(Run, DiagnoseWarnsOnTinyEnsemble) {
  ExperimentConfig cfg = parse_config(R"(task: vowel
method: mfff
depth: 1
vowel: {dim: 12}
backend: {kind: microwave, seed: 2, eta: 0.7, elements: 24, frequencies: 5}
diagnose: {ensemble: 2, n_train: 60, n_test: 60}
)");
  cfg.out = (fs::temp_directory_path() / "pnn_run_diag").string();
  std::ostringstream log;
  ASSERT_EQ(run_diagnose(cfg, log), kExitOk);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  const std::string csv = slurp(fs::path(cfg.out) / "diagnose.csv");
  EXPECT_EQ(csv.rfind("freq,K,zeta_db\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Run, GenDataThenFitSurrogate) {
  ExperimentConfig cfg = config("", "gen");
  cfg.surrogate.n_pairs = 300;
  cfg.surrogate.epochs = 5;
  cfg.surrogate.hidden = {16};
  std::ostringstream log;
  ASSERT_EQ(run_gen_data(cfg, log), kExitOk);
  const fs::path dir = cfg.out;
  EXPECT_EQ(line_count(dir / "test.csv"), 2 + 60);
  EXPECT_EQ(line_count(dir / "train.csv"), 2 + 120);

  const Container pairs = read_container(dir / "pairs.pnn");
  const Pairs direct = generate_pairs(cfg, 0, 300, cfg.seed);
  EXPECT_EQ(tensor_to_matrix(find_tensor(pairs.tensors, "x")), direct.x);
  EXPECT_EQ(tensor_to_matrix(find_tensor(pairs.tensors, "y")), direct.y);
  EXPECT_NEAR(direct.x.row(0).norm(), 1.0, 1e-12);

  ASSERT_EQ(run_fit_surrogate(cfg, dir / "pairs.pnn", log), kExitOk);
  const nlohmann::json fit = read_json(dir / "fit.json");
  EXPECT_EQ(fit.at("n_pairs"), 300);
  EXPECT_LT(fit.at("final_val_mse").get<double>(), fit.at("initial_val_mse").get<double>());
  EXPECT_EQ(line_count(dir / "fit_curve.csv"), 1 + 6);

  // Fitting from the file and from freshly generated pairs is the same fit.
  ExperimentConfig again = cfg;
  again.out = (fs::temp_directory_path() / "pnn_run_gen2").string();
  ASSERT_EQ(run_fit_surrogate(again, std::nullopt, log), kExitOk);
  EXPECT_EQ(slurp(dir / "fit_curve.csv"), slurp(fs::path(again.out) / "fit_curve.csv"));
}

TEST(Run, GuardedMapsExceptionsToExitCodes) {
  std::ostringstream err;
  EXPECT_EQ(guarded([] { return 0; }, err), kExitOk);
  EXPECT_EQ(guarded([]() -> int { throw ConfigError("depth: bad", "depth"); }, err), kExitConfig);
  EXPECT_EQ(guarded([]() -> int { throw UnsupportedOperation("no"); }, err), kExitConfig);
  EXPECT_EQ(guarded([]() -> int { throw BackendError("link down"); }, err), kExitRuntime);
  EXPECT_EQ(guarded([]() -> int { throw std::runtime_error("boom"); }, err), kExitRuntime);
}
