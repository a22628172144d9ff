#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbseg/clustering.hpp"
#include "pbseg/types.hpp"

namespace pbseg {

enum class VotingMode {
  /// Only grouped HPs vote; one pass plus nearest-HP fallback.
  kFrozenVoters,
  /// LPs assigned in a round become voters in the next round. Comparison only.
  kMultiRound,
};

struct VotingOptions {
  VotingMode mode = VotingMode::kFrozenVoters;
  unsigned threads = 1;
};

struct FullAssignment {
  /// Instance id per input point; kUnassigned for points that are neither
  /// grouped HPs nor LPs, and for LPs listed in `unassignable`.
  std::vector<InstanceId> instance;
  /// LPs that could not be assigned because no HP exists.
  std::vector<PointIndex> unassignable;
  /// LPs resolved by the nearest-HP fallback.
  std::size_t fallback_count = 0;
};

/// Assigns each LP (lp_mask[i] != 0) of predicted class c to the instance
/// holding the most same-class grouped HPs within r_m(c) of it, measured in
/// original coordinates. Ties go to the instance with the nearest voting HP,
/// then the lower id. With no same-class HP in range the LP takes the
/// instance of its nearest HP of any class.
FullAssignment assign_lps(std::span<const Point3> original,
                          const PreliminaryAssignment& preliminary,
                          std::span<const std::uint8_t> lp_mask,
                          std::span<const ClassId> semantic, const ClassCatalog& catalog,
                          const VotingOptions& options = {});

}  // namespace pbseg
