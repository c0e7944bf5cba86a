#pragma once

#include <algorithm>
#include <random>
#include <utility>

#include "pnn/core/dataset.hpp"

namespace pnn::testing {

// One blob per class around evenly spaced constant vectors in [0,1]^dim.
inline std::pair<Dataset, Dataset> class_blobs(int n_train, int n_test, int dim, int n_classes, std::uint64_t seed,
                                               double noise = 0.04) {
  Rng rng(seed);
  std::normal_distribution<double> jitter(0.0, noise);
  auto draw = [&](int count, Split split) {
    Dataset d;
    d.n_classes = n_classes;
    d.dim = dim;
    d.split = split;
    for (int i = 0; i < count; ++i) {
      Sample s;
      s.label = i % n_classes;
      s.features.resize(dim);
      for (int j = 0; j < dim; ++j) {
        // alternate the sign pattern so classes differ in direction, not only in scale
        const double centre = (j + s.label) % 2 == 0 ? 0.2 + 0.6 * s.label / std::max(1, n_classes - 1) : 0.5;
        s.features(j) = std::clamp(centre + jitter(rng), 0.0, 1.0);
      }
      d.samples.push_back(std::move(s));
    }
    return d;
  };
  Dataset train = draw(n_train, Split::Train);
  return {std::move(train), draw(n_test, Split::Test)};
}

}  // namespace pnn::testing
