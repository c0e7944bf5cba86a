#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <random>

#include "pnn/core/error.hpp"
#include "pnn/physical/acoustic.hpp"
#include "pnn/physical/microwave.hpp"
#include "pnn/physical/optics.hpp"
#include "pnn/physical/system_io.hpp"

using namespace pnn;
using namespace pnn::physical;

namespace {

Matrix uniform(int r, int c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  Matrix m(r, c);
  for (auto& v : m.reshaped()) v = u(rng);
  return m;
}

double pearson(const Matrix& a, const Matrix& b) {
  const Eigen::ArrayXd x = a.reshaped().array() - a.mean();
  const Eigen::ArrayXd y = b.reshaped().array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

class CountingBackend final : public ForwardBackend {
 public:
  int input_dim() const override { return 2; }
  int output_dim() const override { return 2; }
  Matrix forward(const Matrix& x) const override { return x; }
  std::string kind() const override { return "mock"; }
};

}  // namespace

TEST(Perturb, ZeroNoiseIsBitwiseIdentity) {
  const auto sys = OpticsSystem::random(16, 2);
  const Matrix x = uniform(5, 16, 1);
  const auto same = perturb(sys, 0.0, 0.0, 7);
  EXPECT_EQ(same->forward(x), sys.forward(x));
}

TEST(Perturb, SameSeedSameSystem) {
  const auto sys = OpticsSystem::random(16, 2);
  const Matrix x = uniform(5, 16, 1);
  EXPECT_EQ(perturb(sys, 0.1, 0.05, 3)->forward(x), perturb(sys, 0.1, 0.05, 3)->forward(x));
  EXPECT_NE(perturb(sys, 0.0, 0.05, 3)->forward(x), perturb(sys, 0.0, 0.05, 4)->forward(x));
}

TEST(Perturb, HalfStdNoiseDecorrelatesOptics) {
  const auto sys = OpticsSystem::random(64, 2);
  const Matrix probes = uniform(100, 64, 9);
  const auto noisy = perturb(sys, 0.0, 0.5 * elementwise_std(sys.transmission()), 10);
  EXPECT_LT(pearson(sys.forward(probes), noisy->forward(probes)), 0.9);
}

TEST(Perturb, SourceIsNeverMutated) {
  const auto optics = OpticsSystem::random(16, 2);
  const auto acoustic = AcousticSystem::random(AcousticSpec{});
  const Matrix xo = uniform(4, 16, 1), xa = uniform(4, 20, 2);
  const Matrix before_o = optics.forward(xo), before_a = acoustic.forward(xa);
  (void)perturb(optics, 1.0, 1.0, 1);
  (void)clone_with_param_noise(acoustic, 1.0, 1);
  EXPECT_EQ(optics.forward(xo), before_o);
  EXPECT_EQ(acoustic.forward(xa), before_a);
}

TEST(Perturb, AcousticTwinMismatchIsPositive) {
  const auto real = AcousticSystem::random(AcousticSpec{});
  const auto twin = clone_with_param_noise(real, 0.025, 5);
  const Matrix probes = uniform(200, 20, 3);
  const double mse = (real.forward(probes) - twin->forward(probes)).squaredNorm() / probes.rows() / 20;
  RecordProperty("twin_probe_mse", std::to_string(mse));
  EXPECT_GT(mse, 0.0);
  EXPECT_NE(twin->parameters("")[0], real.parameters("")[0]);
  EXPECT_EQ(twin->parameters("")[2], real.parameters("")[2]);  // gains untouched
}

TEST(Perturb, MicrowaveShiftsOnlyCoupling) {
  const auto sys = MicrowaveSystem::random(MicrowaveSpec{});
  const auto p = perturb(sys, 0.0, 1e-3, 1);
  const auto params = p->parameters("");
  EXPECT_NE(params[0], sys.parameters("")[0]);
  EXPECT_EQ(params[1], sys.parameters("")[1]);
}

TEST(Perturb, NonSimulatorsAreUnsupported) {
  const CountingBackend mock;
  EXPECT_THROW(perturb(mock, 0, 1, 1), UnsupportedOperation);
  EXPECT_THROW(clone_with_param_noise(mock, 1, 1), UnsupportedOperation);
  EXPECT_THROW(backend_vjp(mock, Vector::Zero(2), Vector::Zero(2)), UnsupportedOperation);
  EXPECT_THROW(perturb(OpticsSystem::random(4, 1), 0, -1, 1), InvalidSpec);
}

TEST(Perturb, BackendVjpWrapsBatchedVjp) {
  const auto sys = OpticsSystem::random(8, 1);
  const Vector x = uniform(8, 1, 1).col(0), cot = uniform(8, 1, 2).col(0);
  EXPECT_EQ(backend_vjp(sys, x, cot), sys.vjp(x.transpose(), cot.transpose()).row(0).transpose());
}

TEST(SystemIo, SaveLoadRoundTripsEverySimulator) {
  const auto dir = std::filesystem::temp_directory_path() / ("pnn_sysio_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::vector<std::unique_ptr<Simulator>> systems;
  systems.push_back(OpticsSystem::random(12, 3).clone());
  systems.push_back(AcousticSystem::random(AcousticSpec{}).clone());
  systems.push_back(MicrowaveSystem::random(MicrowaveSpec{}).clone());
  for (const auto& s : systems) {
    const auto path = dir / (s->kind() + ".sys");
    save_system(path, *s);
    const auto back = load_system(path);
    EXPECT_EQ(back->kind(), s->kind());
    const Matrix x = uniform(3, s->input_dim(), 4);
    EXPECT_EQ(back->forward(x), s->forward(x));
  }
}
