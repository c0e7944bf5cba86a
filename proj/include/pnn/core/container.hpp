#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pnn/core/tensor.hpp"

namespace pnn {

// Binary tensor container:
//   8 bytes   magic "PNNCKPT1"
//   8 bytes   header length N, unsigned little-endian
//   N bytes   UTF-8 JSON header {"meta": {...}, "tensors": [{"name", "dtype", "shape", "crc32"}, ...]}
//   payloads  one per tensor in header order, row-major little-endian
//             float64 (complex128 interleaves re, im)
struct Container {
  std::string meta_json = "{}";
  std::vector<Tensor> tensors;
};

void write_container(const std::filesystem::path& path, const Container& c);
// FormatError (with the byte offset) on bad magic, truncation, CRC mismatch,
// trailing bytes or a header that does not describe the payload.
Container read_container(const std::filesystem::path& path);

std::string encode_container(const Container& c);
Container decode_container(const std::string& bytes, const std::string& origin = "<memory>");

}  // namespace pnn
