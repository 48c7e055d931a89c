#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pccl/feature.hpp"
#include "pccl/memory.hpp"

namespace pccl {

struct ScoringParams {
  /// Neighbourhood size of the softmax reweighting; 0 disables it.
  std::uint32_t reweight_neighbors = 0;
  double smoothing_sigma = 4.0;
};

/// Dense 2-D map of nonnegative scores, row-major.
struct ScoreMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> values;

  double at(std::uint32_t y, std::uint32_t x) const { return values[std::size_t{y} * width + x]; }
};

/// Nearest-neighbour distance of every patch, plus the index of that neighbour.
struct PatchScores {
  ScoreMap scores;
  std::vector<std::size_t> nearest;
};

struct AnomalyResult {
  double image_score = 0.0;
  std::uint32_t routed_task = 0;
  ScoreMap patch_scores;
  ScoreMap heatmap;
};

/// Exact brute-force nearest neighbour search over the bank.
PatchScores patch_scores(const FeatureGrid& grid, const MemoryBank& bank);

/// Plain image score: the maximum patch score.
double image_score(std::span<const double> patch_scores);

/// Image score with optional softmax reweighting of the maximal patch.
///
/// With b = params.reweight_neighbors > 0, let m be the highest-scoring test
/// patch, n its nearest bank vector and N the b bank vectors closest to n
/// (n included). The score s = |m - n| is scaled by
/// 1 - exp(s) / sum_{v in N} exp(|m - v|).
double image_score(const PatchScores& scores, const FeatureGrid& grid, const MemoryBank& bank,
                   const ScoringParams& params);

/// Scores the grid against every bank and keeps the lowest image score
/// (ties to the lowest task index); patch scores and heatmap come from that bank.
AnomalyResult route_and_score(const FeatureGrid& grid, const MemoryBankSet& set,
                              const ScoringParams& params);

/// Score against one bank, no routing.
AnomalyResult score_against(const FeatureGrid& grid, const MemoryBank& bank,
                            const ScoringParams& params);

/// Bilinear upsample (half-pixel centres) to the image size followed by a
/// normalized Gaussian blur with reflected borders; sigma 0 skips the blur.
ScoreMap heatmap(const ScoreMap& patch_scores, const ImageGeometry& geometry, double sigma);

/// Normalized 1-D Gaussian kernel of radius ceil(4 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Min-max normalisation to 0..255 for visualisation; constant maps go to 0.
std::vector<std::uint8_t> to_u8(const ScoreMap& map);

/// Raw little-endian f32 dump of the map values.
void write_heatmap_f32(const ScoreMap& map, const std::filesystem::path& path);

/// Binary PGM (P5) of to_u8(map).
void write_heatmap_pgm(const ScoreMap& map, const std::filesystem::path& path);

} // namespace pccl
