#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "pnn/core/types.hpp"

namespace pnn {

enum class Split { Train, Test };

struct Sample {
  Vector features;  // values in [0,1]
  int label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int n_classes = 0;
  int dim = 0;
  Split split = Split::Train;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // N x dim feature matrix, one row per sample.
  Matrix features() const;
  std::vector<int> labels() const;
  // First n samples (or all of them when n exceeds the size).
  Dataset head(std::size_t n) const;

  // Throws ConsistencyError when a sample violates the declared shape,
  // label range, finiteness or [0,1] bounds.
  void validate() const;
};

// Reads an IDX image/label pair (plain or gzip-compressed). Images are
// scaled to [0,1], center-cropped by `crop` pixels on each side and
// flattened row-major.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path, int crop = 1,
                       Split split = Split::Train);

struct VowelSpec {
  int n_classes = 6;
  int dim = 40;
  int n_train = 2000;
  int n_test = 500;
  double noise_sigma = 0.3;
  std::uint64_t seed = 7;
};

// Synthetic stand-in for a vowel corpus: one random spectral template per
// class, samples are clip(s * (template + noise), 0, 1) with s ~ U[0.5, 1].
std::pair<Dataset, Dataset> gen_vowel_dataset(const VowelSpec& spec);

// CSV layout: a "dim,n_classes" header line, a line with both values, then
// one row per sample holding the features followed by the label.
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path, Split split);

}  // namespace pnn
