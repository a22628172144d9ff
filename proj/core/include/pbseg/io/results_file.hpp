#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pbseg/evaluation.hpp"
#include "pbseg/pipeline.hpp"

namespace pbseg::io {

inline constexpr int kResultsSchemaVersion = 1;

struct CloudReference {
  std::string path;
  std::uint64_t points = 0;
  /// Trailer checksum of the columnar cloud file (FNV-1a of the encoding).
  std::uint64_t checksum = 0;
};

struct ResultsDocument {
  PipelineConfig config;
  CloudReference cloud;
  std::vector<InstanceProposal> instances;
  RunMetadata meta;
  std::optional<EvalReport> eval;
};

/// (start, length) runs over an ascending index list.
using Run = std::pair<std::uint32_t, std::uint32_t>;
std::vector<Run> run_length_encode(std::span<const PointIndex> sorted_indices);
std::vector<PointIndex> run_length_decode(std::span<const Run> runs);

/// Deterministic JSON. Stage timings live only in the top-level "timings"
/// object, which is dropped when include_timings is false.
std::string results_to_json(const ResultsDocument& doc, const ClassCatalog& catalog,
                            bool include_timings = true);

/// Throws kMalformedFile on schema violations or indices outside the
/// referenced cloud.
ResultsDocument parse_results(std::string_view json_text);

void write_results(const std::filesystem::path& path, const ResultsDocument& doc,
                   const ClassCatalog& catalog, bool include_timings = true);
ResultsDocument read_results(const std::filesystem::path& path);

std::string eval_report_to_json(const EvalReport& report);

/// Fraction of non-background points inside at least one proposal; 1.0
/// when the cloud has no foreground.
double foreground_coverage(std::span<const InstanceProposal> proposals,
                           const LabeledCloud& cloud, const ClassCatalog& catalog);

/// AP report plus offset and dice diagnostics when the cloud carries
/// ground truth. Throws kMissingGroundTruth otherwise.
EvalReport evaluate(std::span<const InstanceProposal> proposals, const LabeledCloud& cloud,
                    const ClassCatalog& catalog, const EvalOptions& options);

}  // namespace pbseg::io
