#include <algorithm>
#include <random>

#include "pnn/core/dataset.hpp"
#include "pnn/core/error.hpp"

namespace pnn {
namespace {

Dataset draw_split(const Matrix& templates, int count, double noise_sigma, Split split, Rng& rng) {
  const int n_classes = static_cast<int>(templates.rows());
  const int dim = static_cast<int>(templates.cols());
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> amplitude(0.5, 1.0);

  Dataset data;
  data.n_classes = n_classes;
  data.dim = dim;
  data.split = split;
  data.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    Sample s;
    s.label = i % n_classes;
    const double scale = amplitude(rng);
    s.features.resize(dim);
    for (int j = 0; j < dim; ++j) {
      const double v = templates(s.label, j) + noise_sigma * noise(rng);
      s.features[j] = std::clamp(scale * v, 0.0, 1.0);
    }
    data.samples.push_back(std::move(s));
  }
  std::shuffle(data.samples.begin(), data.samples.end(), rng);
  return data;
}

}  // namespace

std::pair<Dataset, Dataset> gen_vowel_dataset(const VowelSpec& spec) {
  if (spec.n_classes < 2) throw InvalidSpec("vowel task needs at least 2 classes");
  if (spec.n_classes > spec.dim) throw InvalidSpec("vowel task needs dim >= n_classes");
  if (spec.noise_sigma < 0.0) throw InvalidSpec("noise_sigma must be non-negative");
  if (spec.n_train < 0 || spec.n_test < 0) throw InvalidSpec("sample counts must be non-negative");

  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix templates(spec.n_classes, spec.dim);
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int j = 0; j < spec.dim; ++j) templates(c, j) = unit(rng);
  }
  Dataset train = draw_split(templates, spec.n_train, spec.noise_sigma, Split::Train, rng);
  Dataset test = draw_split(templates, spec.n_test, spec.noise_sigma, Split::Test, rng);
  return {std::move(train), std::move(test)};
}

}  // namespace pnn
