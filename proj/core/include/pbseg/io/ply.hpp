#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pbseg/io/cloud_file.hpp"

namespace pbseg::io {

/// ASCII PLY with per-vertex properties x y z semantic [score_<c>...]
/// [offset_x offset_y offset_z] [gt_instance gt_semantic]. The catalog and
/// provenance travel as `comment pbseg_catalog <json>` and
/// `comment pbseg_provenance <json>` lines. Reals are printed with 17
/// significant digits, so a round trip is exact.
std::string encode_ply(const CloudDocument& doc);

/// Unknown vertex properties and extra elements are skipped. Throws
/// kMalformedFile when x, y, z, semantic or the catalog comment is missing.
CloudDocument decode_ply(std::string_view text);

void write_ply(const std::filesystem::path& path, const CloudDocument& doc);
CloudDocument read_ply(const std::filesystem::path& path);

/// Reads .ply as PLY and anything else as the columnar format.
CloudDocument read_any_cloud(const std::filesystem::path& path);

}  // namespace pbseg::io
