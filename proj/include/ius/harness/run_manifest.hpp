#pragma once
// Reproducibility record written next to every CLI and study output:
// {seed, config, inputs: {path: crc32}}.

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ius/data/csv.hpp"

namespace ius::harness {

inline std::string crc32_hex(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

inline std::string file_crc32(const std::filesystem::path& path) {
  return crc32_hex(data::read_text_file(path.string()));
}

struct RunManifest {
  std::uint64_t seed = 42;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::map<std::string, std::string> input_hashes;  // path -> crc32 hex

  void add_input(const std::filesystem::path& path) { input_hashes[path.string()] = file_crc32(path); }

  std::string serialize() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["config"] = config;
    j["input_hashes"] = input_hashes;
    return j.dump(2) + "\n";
  }

  void write(const std::filesystem::path& path) const { data::write_text_file(path.string(), serialize()); }
};

}  // namespace ius::harness
