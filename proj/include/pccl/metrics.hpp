#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pccl/scoring.hpp"

namespace pccl {

// Detection metrics. Labels are 0 (normal) / 1 (anomalous); higher scores
// mean more anomalous.

/// Mann-Whitney AUROC with ties counting one half.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct F1Result {
  double f1 = 0.0;
  double threshold = 0.0;
};

/// Best F1 over cut points at midpoints between distinct scores and +/-inf;
/// scores >= threshold are predicted anomalous. Among equal F1 values the
/// highest threshold wins.
F1Result best_f1(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Step-interpolated area under the precision-recall curve.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

inline constexpr double kDefaultFprLimit = 0.3;

/// Area under the per-region-overlap curve up to `fpr_limit`, divided by the limit.
///
/// Regions are 4-connected components of each mask. PRO at a threshold is the
/// mean over all regions of the fraction of their pixels scoring >= threshold;
/// FPR is the fraction of normal pixels scoring >= threshold.
double aupro(std::span<const ScoreMap> heatmaps, std::span<const std::vector<std::uint8_t>> masks,
             double fpr_limit = kDefaultFprLimit);

/// 4-connected component labels of a binary mask; 0 is background, regions
/// are numbered from 1 in raster order of their first pixel.
std::vector<std::uint32_t> label_components(std::span<const std::uint8_t> mask,
                                            std::uint32_t height, std::uint32_t width,
                                            std::uint32_t* count = nullptr);

// Continual-learning metrics.

/// Lower-triangular performance matrix: at(k, t) is the metric on task t after
/// training through task k (0-based, t <= k).
class RMatrix {
public:
  RMatrix() = default;
  RMatrix(std::string metric, std::size_t tasks);

  const std::string& metric() const noexcept { return metric_; }
  std::size_t tasks() const noexcept { return rows_.size(); }

  void set(std::size_t k, std::size_t t, double value);
  std::optional<double> at(std::size_t k, std::size_t t) const;
  bool complete() const;

  /// Mean of the defined entries of row k.
  std::optional<double> row_mean(std::size_t k) const;

  /// Sub-matrix restricted to the given task indices (ascending).
  RMatrix restrict(std::span<const std::size_t> task_indices) const;

  friend bool operator==(const RMatrix&, const RMatrix&) = default;

private:
  std::string metric_;
  std::vector<std::vector<std::optional<double>>> rows_;
};

/// Average forgetting as a percentage:
/// 100/(T-1) * sum_{t<T} (max_k R[k][t] - R[T][t]), the max taken over every
/// recorded row of column t. Throws on T < 2 or missing entries.
double average_forgetting(const RMatrix& r);

/// delta = F1_joint - F1_cl.
double relative_gap(double f1_joint, double f1_cl);

struct MemoryReport {
  double architecture_mb = 0.0;
  double additional_mb = 0.0;
};

inline constexpr double kBytesPerMegabyte = 1e6;

/// f32 accounting in decimal megabytes.
MemoryReport memory_report(std::uint64_t total_vectors, std::uint64_t dim,
                           std::uint64_t backbone_param_count);
MemoryReport memory_report(const MemoryBankSet& set, std::uint64_t backbone_param_count);

} // namespace pccl
