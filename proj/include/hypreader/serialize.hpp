#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hypreader/common.hpp"

#include "json.hpp"

namespace hypreader {

// Versioned model container: 10-byte magic, little-endian u64 header length,
// UTF-8 JSON header, then row-major little-endian float32 tensor payload in
// the order the header's owner documents.
struct ModelContainer {
  std::string magic;        // exactly 10 bytes
  nlohmann::json header;
  std::vector<float> payload;
};

namespace serialize_detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_u64_le(const std::string& in, size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i]))
         << (8 * i);
  return v;
}

inline void put_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline float get_f32_le(const std::string& in, size_t at) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i]))
            << (8 * i);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace serialize_detail

inline void write_container(const std::string& path, const ModelContainer& mc) {
  if (mc.magic.size() != 10)
    throw Error("BadMagic", "magic must be exactly 10 bytes");
  std::string out = mc.magic;
  const std::string header = mc.header.dump();
  serialize_detail::put_u64_le(out, header.size());
  out += header;
  out.reserve(out.size() + mc.payload.size() * 4);
  for (const float f : mc.payload) serialize_detail::put_f32_le(out, f);
  write_file(path, out);
}

inline ModelContainer read_container(const std::string& path,
                                     const std::string& expected_magic,
                                     int expected_version) {
  const std::string raw = read_file(path);
  if (raw.size() < 18)
    throw Error("BadContainer", path + ": truncated model file");
  ModelContainer mc;
  mc.magic = raw.substr(0, 10);
  if (mc.magic != expected_magic)
    throw Error("BadMagic", path + ": expected magic '" + expected_magic +
                                "', found '" + mc.magic + "'");
  const std::uint64_t header_len = serialize_detail::get_u64_le(raw, 10);
  if (18 + header_len > raw.size())
    throw Error("BadContainer", path + ": header overruns file");
  try {
    mc.header = nlohmann::json::parse(raw.substr(18, header_len));
  } catch (const std::exception& e) {
    throw Error("BadContainer", path + ": bad JSON header: " + e.what());
  }
  const int version = mc.header.value("version", -1);
  if (version != expected_version)
    throw Error("VersionMismatch",
                path + ": container version " + std::to_string(version) +
                    ", expected " + std::to_string(expected_version));
  const size_t payload_at = 18 + header_len;
  const size_t payload_bytes = raw.size() - payload_at;
  if (payload_bytes % 4 != 0)
    throw Error("BadContainer", path + ": payload is not float32-aligned");
  mc.payload.reserve(payload_bytes / 4);
  for (size_t at = payload_at; at < raw.size(); at += 4)
    mc.payload.push_back(serialize_detail::get_f32_le(raw, at));
  return mc;
}

// Shared helpers for double<->float payload round trips.
inline void append_f32(std::vector<float>& payload,
                       const std::vector<double>& values) {
  payload.reserve(payload.size() + values.size());
  for (const double v : values) payload.push_back(static_cast<float>(v));
}

inline std::vector<double> take_f64(const std::vector<float>& payload,
                                    size_t& cursor, size_t count) {
  if (cursor + count > payload.size())
    throw Error("BadContainer", "payload shorter than header implies");
  std::vector<double> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = payload[cursor + i];
  cursor += count;
  return out;
}

}  // namespace hypreader
