#include "pnn/core/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "pnn/core/error.hpp"

namespace pnn {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'N', 'N', 'C', 'K', 'P', 'T', '1'};

std::uint32_t crc_of(const std::vector<double>& values) {
  const auto* bytes = reinterpret_cast<const Bytef*>(values.data());
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t left = values.size() * sizeof(double);
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, bytes, chunk);
    bytes += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string encode_container(const Container& c) {
  json header;
  try {
    header["meta"] = json::parse(c.meta_json);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("container metadata is not valid JSON: ") + e.what());
  }
  header["tensors"] = json::array();
  for (const auto& t : c.tensors) {
    if (static_cast<std::int64_t>(t.values.size()) != t.element_count() * (t.is_complex ? 2 : 1)) {
      throw ConsistencyError("tensor '" + t.name + "' has a value count that disagrees with its shape");
    }
    header["tensors"].push_back(
        {{"name", t.name}, {"dtype", t.is_complex ? "complex128" : "float64"}, {"shape", t.shape}, {"crc32", crc_of(t.values)}});
  }
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  const std::uint64_t n = text.size();
  out.append(reinterpret_cast<const char*>(&n), sizeof(n));
  out += text;
  for (const auto& t : c.tensors) out.append(reinterpret_cast<const char*>(t.values.data()), t.byte_size());
  return out;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  const std::string bytes = encode_container(c);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Container decode_container(const std::string& bytes, const std::string& origin) {
  auto fail = [&](std::size_t offset, const std::string& msg) {
    return FormatError(origin + ": " + msg + " at byte offset " + std::to_string(offset));
  };
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw fail(0, "bad magic (expected PNNCKPT1)");
  }
  std::size_t pos = sizeof(kMagic);
  if (bytes.size() < pos + 8) throw fail(pos, "truncated header length");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + pos, 8);
  pos += 8;
  if (header_len > bytes.size() - pos) throw fail(pos, "truncated header (declared " + std::to_string(header_len) + " bytes)");
  json header;
  try {
    header = json::parse(bytes.substr(pos, header_len));
  } catch (const json::parse_error& e) {
    throw fail(pos, std::string("header is not valid JSON (") + e.what() + ")");
  }
  const std::size_t header_pos = pos;
  pos += header_len;
  if (!header.is_object() || !header.contains("tensors") || !header["tensors"].is_array()) {
    throw fail(header_pos, "header lacks a tensor list");
  }
  Container c;
  c.meta_json = header.contains("meta") ? header["meta"].dump() : "{}";
  for (const auto& entry : header["tensors"]) {
    Tensor t;
    try {
      t.name = entry.at("name").get<std::string>();
      const auto dtype = entry.at("dtype").get<std::string>();
      if (dtype == "complex128") {
        t.is_complex = true;
      } else if (dtype != "float64") {
        throw fail(header_pos, "tensor '" + t.name + "' has unsupported dtype '" + dtype + "'");
      }
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    } catch (const json::exception& e) {
      throw fail(header_pos, std::string("malformed tensor entry (") + e.what() + ")");
    }
    for (auto d : t.shape) {
      if (d < 0) throw fail(header_pos, "tensor '" + t.name + "' has a negative dimension");
    }
    const auto count = static_cast<std::size_t>(t.element_count()) * (t.is_complex ? 2u : 1u);
    const std::size_t nbytes = count * sizeof(double);
    if (nbytes > bytes.size() - pos) throw fail(pos, "truncated payload for tensor '" + t.name + "'");
    t.values.resize(count);
    std::memcpy(t.values.data(), bytes.data() + pos, nbytes);
    if (!entry.contains("crc32") || entry["crc32"].get<std::uint32_t>() != crc_of(t.values)) {
      throw fail(pos, "CRC mismatch for tensor '" + t.name + "'");
    }
    pos += nbytes;
    c.tensors.push_back(std::move(t));
  }
  if (pos != bytes.size()) throw fail(pos, std::to_string(bytes.size() - pos) + " trailing bytes");
  return c;
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_container(bytes, path.string());
}

}  // namespace pnn
