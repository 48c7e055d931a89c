#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pccl/patch_matrix.hpp"

namespace pccl {

struct CoresetParams {
  std::size_t target_size = 1;
  std::uint64_t seed = 42;
  /// Compute distances in a seeded Gaussian random projection of this size.
  std::optional<std::size_t> projection_dim;
};

/// Farthest-first traversal from a fixed start index.
///
/// Returns min(k, n) distinct indices; when n <= k this is 0..n-1 in order.
/// Each new center maximizes the minimum squared distance to the chosen
/// centers, ties going to the lowest index.
std::vector<std::size_t> farthest_first(const PatchMatrix& points, std::size_t k,
                                        std::size_t start);

/// Greedy k-center subsampling with a seeded start point.
std::vector<std::size_t> coreset_subsample(const PatchMatrix& points, const CoresetParams& params);

/// Index the seeded RNG picks as the first center for a set of n points.
std::size_t coreset_start_index(std::uint64_t seed, std::size_t n);

/// Max over points of the Euclidean distance to the closest center.
double coverage_radius(const PatchMatrix& points, std::span<const std::size_t> centers);

} // namespace pccl
