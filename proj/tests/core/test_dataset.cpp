#include <gtest/gtest.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pnn/core/dataset.hpp"
#include "pnn/core/error.hpp"

namespace fs = std::filesystem;
using namespace pnn;

namespace {

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>((v >> s) & 0xff));
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes, bool gzip) {
  if (gzip) {
    gzFile f = gzopen(p.string().c_str(), "wb");
    gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
  } else {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

struct IdxPair {
  fs::path images, labels;
};

// n images where pixel (r, c) of image i equals (i + r + c) % 256.
IdxPair write_idx(const fs::path& dir, int n, int n_labels, bool gzip, std::uint32_t image_magic = 0x803) {
  fs::create_directories(dir);
  std::vector<unsigned char> img;
  put_be32(img, image_magic);
  put_be32(img, n);
  put_be32(img, 28);
  put_be32(img, 28);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < 28; ++r)
      for (int c = 0; c < 28; ++c) img.push_back(static_cast<unsigned char>((i + r + c) % 256));
  std::vector<unsigned char> lab;
  put_be32(lab, 0x801);
  put_be32(lab, n_labels);
  for (int i = 0; i < n_labels; ++i) lab.push_back(static_cast<unsigned char>(i % 10));
  IdxPair p{dir / (gzip ? "img.gz" : "img"), dir / (gzip ? "lab.gz" : "lab")};
  write_bytes(p.images, img, gzip);
  write_bytes(p.labels, lab, gzip);
  return p;
}

fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / ("pnn_core_" + name + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST(MnistIdx, CropOneGives676FeaturesScaledTo01) {
  const auto p = write_idx(scratch("crop1"), 3, 3, true);
  const Dataset d = load_mnist_idx(p.images, p.labels, 1);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim, 676);
  EXPECT_EQ(d.n_classes, 10);
  // first feature of image 2 is pixel (1,1) = 4
  EXPECT_DOUBLE_EQ(d.samples[2].features[0], 4.0 / 255.0);
  // row-major: feature 26 is pixel (2,1)
  EXPECT_DOUBLE_EQ(d.samples[0].features[26], 3.0 / 255.0);
  EXPECT_EQ(d.samples[2].label, 2);
  d.validate();
}

TEST(MnistIdx, CropZeroKeepsFullImage) {
  const auto p = write_idx(scratch("crop0"), 2, 2, false);
  const Dataset d = load_mnist_idx(p.images, p.labels, 0);
  EXPECT_EQ(d.dim, 784);
  EXPECT_DOUBLE_EQ(d.samples[1].features[783], ((1 + 27 + 27) % 256) / 255.0);
}

TEST(MnistIdx, BadMagicIsFormatError) {
  const auto p = write_idx(scratch("magic"), 2, 2, false, 0x804);
  EXPECT_THROW(load_mnist_idx(p.images, p.labels, 1), FormatError);
}

TEST(MnistIdx, CountMismatchIsConsistencyError) {
  const auto p = write_idx(scratch("count"), 3, 2, false);
  EXPECT_THROW(load_mnist_idx(p.images, p.labels, 1), ConsistencyError);
}

TEST(MnistIdx, CropThatEatsTheImageIsRejected) {
  const auto p = write_idx(scratch("bigcrop"), 1, 1, false);
  EXPECT_THROW(load_mnist_idx(p.images, p.labels, 14), InvalidSpec);
}

TEST(MnistIdx, BundledSubsetLoads) {
  const fs::path root = PNN_SOURCE_DIR;
  const Dataset d = load_mnist_idx(root / "data/mnist/t10k-images-idx3-ubyte.gz",
                                   root / "data/mnist/t10k-labels-idx1-ubyte.gz", 1, Split::Test);
  EXPECT_EQ(d.size(), 2000u);
  EXPECT_EQ(d.dim, 676);
  d.validate();
}

TEST(Vowel, ZeroNoiseSamplesAreScaledTemplates) {
  VowelSpec spec;
  spec.noise_sigma = 0.0;
  spec.n_train = 60;
  spec.n_test = 30;
  const auto [train, test] = gen_vowel_dataset(spec);
  // Without noise every sample is s * template with s in [0.5, 1]; the
  // direction identifies the class exactly.
  std::vector<Vector> dirs(spec.n_classes);
  for (const auto& s : train.samples) dirs[s.label] = s.features.normalized();
  for (const auto& s : test.samples) {
    int best = 0;
    double best_cos = -2;
    for (int c = 0; c < spec.n_classes; ++c) {
      const double cs = s.features.normalized().dot(dirs[c]);
      if (cs > best_cos) best_cos = cs, best = c;
    }
    EXPECT_EQ(best, s.label);
    EXPECT_NEAR(best_cos, 1.0, 1e-12);
  }
}

TEST(Vowel, SameSeedIsBitwiseIdentical) {
  const VowelSpec spec;
  const auto a = gen_vowel_dataset(spec);
  const auto b = gen_vowel_dataset(spec);
  ASSERT_EQ(a.first.size(), b.first.size());
  EXPECT_EQ(a.first.features(), b.first.features());
  EXPECT_EQ(a.second.features(), b.second.features());
  EXPECT_EQ(a.first.labels(), b.first.labels());
}

TEST(Vowel, ShapesAndRanges) {
  const auto [train, test] = gen_vowel_dataset(VowelSpec{});
  EXPECT_EQ(train.size(), 2000u);
  EXPECT_EQ(test.size(), 500u);
  EXPECT_EQ(train.dim, 40);
  train.validate();
  test.validate();
}

TEST(Vowel, NearestTemplateCeiling) {
  // Brute-force nearest class mean (estimated on train) by cosine similarity.
  const auto [train, test] = gen_vowel_dataset(VowelSpec{});
  std::vector<Vector> mean(6, Vector::Zero(40));
  for (const auto& s : train.samples) mean[s.label] += s.features;
  int correct = 0;
  for (const auto& s : test.samples) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 6; ++c) {
      double d = 0;
      const Vector m = mean[c].normalized();
      const Vector x = s.features.normalized();
      for (int j = 0; j < 40; ++j) d += (x[j] - m[j]) * (x[j] - m[j]);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == s.label;
  }
  const double ceiling = static_cast<double>(correct) / test.size();
  RecordProperty("nearest_template_accuracy", std::to_string(ceiling));
  EXPECT_GT(ceiling, 0.9);
}

TEST(Vowel, RejectsMoreClassesThanDims) {
  VowelSpec spec;
  spec.n_classes = 50;
  EXPECT_THROW(gen_vowel_dataset(spec), InvalidSpec);
}

TEST(DatasetCsv, RoundTripIsExact) {
  VowelSpec spec;
  spec.n_train = 20;
  spec.n_test = 5;
  const auto [train, test] = gen_vowel_dataset(spec);
  const auto path = scratch("csv").string() + ".csv";
  save_dataset_csv(train, path);
  const Dataset back = load_dataset_csv(path, Split::Train);
  EXPECT_EQ(back.features(), train.features());
  EXPECT_EQ(back.labels(), train.labels());
  EXPECT_EQ(back.n_classes, train.n_classes);
}

TEST(Dataset, ValidateCatchesBadLabel) {
  Dataset d;
  d.n_classes = 2;
  d.dim = 2;
  d.samples.push_back({Vector::Zero(2), 2});
  EXPECT_THROW(d.validate(), ConsistencyError);
}
