#pragma once
// Model container: JSON with base64 little-endian f32 tensors and a CRC32
// over the tensor bytes (in file order) followed by the bias bytes.

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ius/data/csv.hpp"
#include "ius/neural/epu.hpp"

namespace ius::data {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<std::uint8_t>& in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (i + 1 == in.size()) {
    const std::uint32_t v = in[i] << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (in.size() % 4 != 0) fail(ErrorKind::Format, "base64 payload length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = in[i + k];
      if (c == '=' && i + 4 == in.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else {
        if (pad) fail(ErrorKind::Format, "malformed base64 padding");
        v[k] = value(c);
        if (v[k] < 0) fail(ErrorKind::Format, "invalid base64 character");
      }
    }
    const std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

inline void append_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

inline float read_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(bits);
}

inline std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

// Tensors other than the scalar output bias, which is stored separately.
template <typename F>
void for_each_weight(const neural::EpuModel<float>& m, F&& f) {
  m.for_each_tensor([&](const std::string& name, const neural::ParamTensor<float>& t) {
    if (name != "bias") f(name, t);
  });
}

template <typename F>
void for_each_weight(neural::EpuModel<float>& m, F&& f) {
  m.for_each_tensor([&](const std::string& name, neural::ParamTensor<float>& t) {
    if (name != "bias") f(name, t);
  });
}

inline std::uint32_t model_checksum(const neural::EpuModel<float>& m) {
  std::vector<std::uint8_t> bytes;
  for_each_weight(m, [&](const std::string&, const neural::ParamTensor<float>& t) {
    for (float v : t.data) append_f32(bytes, v);
  });
  append_f32(bytes, m.bias.data[0]);
  return crc32_of(bytes);
}

template <typename J>
const J& field(const J& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Format, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace detail

inline std::uint32_t model_checksum(const neural::EpuModel<float>& m) { return detail::model_checksum(m); }

inline nlohmann::ordered_json model_to_json(const neural::EpuModel<float>& m) {
  nlohmann::ordered_json j;
  const auto& a = m.architecture();
  j["format_version"] = kModelFormatVersion;
  j["pfm_config"] = pfm::to_string(m.config());
  j["input_size"] = {a.input_rows, a.input_cols};
  j["architecture"] = {{"in_channels", a.in_channels},
                       {"conv1_filters", a.conv1_filters},
                       {"conv2_filters", a.conv2_filters},
                       {"dense_units", a.dense_units},
                       {"head", neural::to_string(a.head)}};
  // float -> double is exact and the JSON writer round-trips doubles
  j["bias"] = static_cast<double>(m.bias.data[0]);
  auto tensors = nlohmann::ordered_json::array();
  detail::for_each_weight(m, [&](const std::string& name, const neural::ParamTensor<float>& t) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(t.size() * 4);
    for (float v : t.data) detail::append_f32(bytes, v);
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"dtype", "f32"}, {"data", detail::base64_encode(bytes)}});
  });
  j["tensors"] = std::move(tensors);
  j["checksum"] = detail::model_checksum(m);
  return j;
}

inline std::string serialize_model(const neural::EpuModel<float>& m) { return model_to_json(m).dump(1) + "\n"; }

// Builds a fresh model and fills it completely before returning; any
// failure throws and nothing partial escapes.
inline neural::EpuModel<float> parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("model file is not valid JSON (truncated?): ") + e.what());
  }
  try {
    const auto& ver = detail::field(j, "format_version");
    if (!ver.is_number_integer()) fail(ErrorKind::Format, "format_version must be an integer");
    if (ver.get<int>() != kModelFormatVersion)
      fail(ErrorKind::Version, "model format version " + std::to_string(ver.get<int>()) +
                                   " is not supported (expected version " +
                                   std::to_string(kModelFormatVersion) + ")");
    const auto config = pfm::parse_pfm_config(detail::field(j, "pfm_config").get<std::string>());
    const auto& size = detail::field(j, "input_size");
    if (!size.is_array() || size.size() != 2) fail(ErrorKind::Format, "input_size must be [H, W]");
    const auto& arch_j = detail::field(j, "architecture");
    neural::Architecture arch;
    arch.input_rows = size[0].get<int>();
    arch.input_cols = size[1].get<int>();
    arch.in_channels = detail::field(arch_j, "in_channels").get<int>();
    arch.conv1_filters = detail::field(arch_j, "conv1_filters").get<int>();
    arch.conv2_filters = detail::field(arch_j, "conv2_filters").get<int>();
    arch.dense_units = detail::field(arch_j, "dense_units").get<int>();
    if (detail::field(arch_j, "head").get<std::string>() != "tanh")
      fail(ErrorKind::Format, "EPU sub-networks must use the tanh head");
    if (arch.in_channels != 1) fail(ErrorKind::Format, "EPU sub-networks take one input channel");
    arch.validate();

    neural::EpuModel<float> m(config, arch);
    const auto& tensors = detail::field(j, "tensors");
    if (!tensors.is_array()) fail(ErrorKind::Format, "tensors must be an array");
    std::size_t k = 0;
    detail::for_each_weight(m, [&](const std::string& name, neural::ParamTensor<float>& t) {
      if (k >= tensors.size()) fail(ErrorKind::Format, "model file is missing tensor " + name);
      const auto& tj = tensors[k++];
      if (detail::field(tj, "name").get<std::string>() != name)
        fail(ErrorKind::Format, "expected tensor " + name + ", found " + tj.at("name").get<std::string>());
      if (detail::field(tj, "dtype").get<std::string>() != "f32")
        fail(ErrorKind::Format, "tensor " + name + " has unsupported dtype");
      if (detail::field(tj, "shape").get<std::vector<int>>() != t.shape)
        fail(ErrorKind::Shape, "tensor " + name + " shape does not match the architecture");
      const auto bytes = detail::base64_decode(detail::field(tj, "data").get<std::string>());
      if (bytes.size() != t.size() * 4)
        fail(ErrorKind::Format, "tensor " + name + " payload is truncated");
      for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = detail::read_f32(bytes.data() + 4 * i);
    });
    if (k != tensors.size()) fail(ErrorKind::Format, "model file has unexpected extra tensors");
    const auto& bias = detail::field(j, "bias");
    if (!bias.is_number()) fail(ErrorKind::Format, "bias must be a number");
    m.bias.data[0] = static_cast<float>(bias.get<double>());

    const auto& crc = detail::field(j, "checksum");
    if (!crc.is_number_unsigned() && !crc.is_number_integer()) fail(ErrorKind::Format, "checksum must be an integer");
    const auto stored = crc.get<std::uint64_t>();
    const auto actual = detail::model_checksum(m);
    if (stored != actual)
      fail(ErrorKind::Checksum, "model checksum mismatch: stored " + std::to_string(stored) + ", computed " +
                                    std::to_string(actual));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const neural::EpuModel<float>& m, const std::filesystem::path& path) {
  write_text_file(path.string(), serialize_model(m));
}

inline neural::EpuModel<float> load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing model file " + path.string());
  try {
    return parse_model(read_text_file(path.string()));
  } catch (const DeficitError&) {
    throw;
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace ius::data
