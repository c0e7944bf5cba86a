#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <zlib.h>

#include "pnn/core/dataset.hpp"
#include "pnn/core/error.hpp"

namespace pnn {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

// gzread passes uncompressed files through unchanged.
class IdxReader {
 public:
  explicit IdxReader(const std::filesystem::path& path)
      : path_(path.string()), file_(gzopen(path_.c_str(), "rb")) {
    if (!file_) throw Error("cannot open " + path_);
  }

  void read(void* dst, std::size_t n) {
    const int got = gzread(file_.get(), dst, static_cast<unsigned>(n));
    if (got < 0 || static_cast<std::size_t>(got) != n) {
      throw FormatError(path_ + ": truncated IDX file");
    }
  }

  std::uint32_t read_be32() {
    std::array<unsigned char, 4> b{};
    read(b.data(), b.size());
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  GzHandle file_;
};

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path, int crop, Split split) {
  IdxReader images(images_path);
  IdxReader labels(labels_path);

  if (const auto magic = images.read_be32(); magic != kImageMagic) {
    throw FormatError(images.path() + ": bad image magic number " + std::to_string(magic));
  }
  if (const auto magic = labels.read_be32(); magic != kLabelMagic) {
    throw FormatError(labels.path() + ": bad label magic number " + std::to_string(magic));
  }
  const auto n_images = images.read_be32();
  const int rows = static_cast<int>(images.read_be32());
  const int cols = static_cast<int>(images.read_be32());
  const auto n_labels = labels.read_be32();
  if (n_images != n_labels) {
    throw ConsistencyError("image count " + std::to_string(n_images) +
                           " does not match label count " + std::to_string(n_labels));
  }
  if (crop < 0 || rows - 2 * crop <= 0 || cols - 2 * crop <= 0) {
    throw InvalidSpec("crop " + std::to_string(crop) + " leaves no pixels");
  }

  const int out_rows = rows - 2 * crop;
  const int out_cols = cols - 2 * crop;
  Dataset data;
  data.n_classes = 10;
  data.dim = out_rows * out_cols;
  data.split = split;
  data.samples.reserve(n_images);

  std::vector<unsigned char> pixels(static_cast<std::size_t>(rows) * cols);
  std::vector<unsigned char> label_bytes(n_labels);
  labels.read(label_bytes.data(), label_bytes.size());
  for (std::uint32_t i = 0; i < n_images; ++i) {
    images.read(pixels.data(), pixels.size());
    Sample s;
    s.features.resize(data.dim);
    for (int r = 0; r < out_rows; ++r) {
      for (int c = 0; c < out_cols; ++c) {
        s.features[r * out_cols + c] = pixels[(r + crop) * cols + (c + crop)] / 255.0;
      }
    }
    s.label = label_bytes[i];
    if (s.label >= data.n_classes) {
      throw FormatError(labels.path() + ": label " + std::to_string(s.label) + " out of range");
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace pnn
