#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pbseg/types.hpp"

namespace pbseg::io {

inline constexpr std::uint32_t kCloudFormatVersion = 1;

struct Provenance {
  std::string generator;
  /// Name of the random stream ("mt19937_64" for synth output).
  std::string rng;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CloudDocument {
  LabeledCloud cloud;
  ClassCatalog catalog;
  Provenance provenance;

  friend bool operator==(const CloudDocument&, const CloudDocument&) = default;
};

/// Columnar little-endian container:
///   "PBCLOUD\0", u32 version, u32 column flags, u64 point count,
///   u64 header length, JSON header (catalog, provenance),
///   f64 xyz, i32 semantic, [f64 scores N x C], [f64 offsets],
///   [i32 gt instance], [i32 gt semantic], "PBEND\0\0\0",
///   u64 FNV-1a of every preceding byte.
std::string encode_cloud(const CloudDocument& doc);

/// Throws kMalformedFile on any structural problem, including a truncated
/// body or checksum mismatch.
CloudDocument decode_cloud(std::string_view bytes);

/// FNV-1a checksum stored in an encoded cloud's trailer.
std::uint64_t cloud_checksum(std::string_view encoded);

/// Writes through a temporary file in the same directory and renames it, so
/// readers never observe a partial file.
void write_cloud_file(const std::filesystem::path& path, const CloudDocument& doc);
CloudDocument read_cloud_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace pbseg::io
