#include "pccl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pccl/errors.hpp"

namespace pccl {

namespace {

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ClassCounts check_labels(std::span<const double> scores, std::span<const std::uint8_t> labels,
                         const char* metric) {
  if (scores.size() != labels.size())
    throw InvalidArgument(std::string(metric) + ": scores and labels differ in length");
  ClassCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] > 1) throw InvalidArgument(std::string(metric) + ": labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw InvalidArgument(std::string(metric) + ": non-finite score");
    (labels[i] ? c.positives : c.negatives)++;
  }
  return c;
}

void require_both(const ClassCounts& c, const char* metric) {
  if (c.positives == 0 || c.negatives == 0)
    throw InvalidArgument(std::string(metric) + " needs both normal and anomalous samples");
}

std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// Calls visit(tp, fp, next_score) after absorbing each group of equal scores,
// walking from the highest score down. next_score is the next lower distinct
// score or -inf after the last group.
template <typename Visit>
void sweep_groups(std::span<const double> scores, std::span<const std::uint8_t> labels, Visit visit) {
  const auto idx = order_descending(scores);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double s = scores[idx[i]];
    std::size_t j = i;
    for (; j < idx.size() && scores[idx[j]] == s; ++j) (labels[idx[j]] ? tp : fp)++;
    const double next = j < idx.size() ? scores[idx[j]] : -std::numeric_limits<double>::infinity();
    visit(tp, fp, s, next);
    i = j;
  }
}

} // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto c = check_labels(scores, labels, "auroc");
  require_both(c, "auroc");
  // Mann-Whitney U: each positive earns 1 per lower-scored negative and 1/2 per tie.
  double u = 0.0;
  std::size_t negatives_below = c.negatives;
  const auto idx = order_descending(scores);
  for (std::size_t i = 0; i < idx.size();) {
    const double s = scores[idx[i]];
    std::size_t gp = 0, gn = 0, j = i;
    for (; j < idx.size() && scores[idx[j]] == s; ++j) (labels[idx[j]] ? gp : gn)++;
    negatives_below -= gn;
    u += static_cast<double>(gp) * (static_cast<double>(negatives_below) + 0.5 * static_cast<double>(gn));
    i = j;
  }
  return u / (static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

F1Result best_f1(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto c = check_labels(scores, labels, "best_f1");
  require_both(c, "best_f1");
  F1Result best{0.0, std::numeric_limits<double>::infinity()};
  sweep_groups(scores, labels, [&](std::size_t tp, std::size_t fp, double s, double next) {
    const double fn = static_cast<double>(c.positives - tp);
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + static_cast<double>(fp) + fn);
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = std::isinf(next) ? next : 0.5 * (s + next);
    }
  });
  return best;
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto c = check_labels(scores, labels, "average_precision");
  if (c.positives == 0) throw InvalidArgument("average_precision needs at least one positive");
  double ap = 0.0, prev_recall = 0.0;
  const double positives = static_cast<double>(c.positives);
  sweep_groups(scores, labels, [&](std::size_t tp, std::size_t fp, double, double) {
    const double recall = static_cast<double>(tp) / positives;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  });
  return ap;
}

std::vector<std::uint32_t> label_components(std::span<const std::uint8_t> mask,
                                            std::uint32_t height, std::uint32_t width,
                                            std::uint32_t* count) {
  const std::size_t n = std::size_t{height} * width;
  if (mask.size() != n) throw InvalidArgument("mask size does not match its dimensions");
  std::vector<std::uint32_t> labels(n, 0);
  std::vector<std::size_t> stack;
  std::uint32_t next = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (!mask[start] || labels[start]) continue;
    labels[start] = ++next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / width, x = p % width;
      auto visit = [&](std::size_t q) {
        if (mask[q] && !labels[q]) {
          labels[q] = next;
          stack.push_back(q);
        }
      };
      if (y > 0) visit(p - width);
      if (y + 1 < height) visit(p + width);
      if (x > 0) visit(p - 1);
      if (x + 1 < width) visit(p + 1);
    }
  }
  if (count) *count = next;
  return labels;
}

double aupro(std::span<const ScoreMap> heatmaps, std::span<const std::vector<std::uint8_t>> masks,
             double fpr_limit) {
  if (heatmaps.size() != masks.size()) throw InvalidArgument("aupro: heatmap and mask counts differ");
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw InvalidArgument("aupro: fpr_limit must be in (0, 1]");

  struct Pixel {
    double score;
    std::uint32_t region; // 0 = normal, otherwise global region id
  };
  std::vector<Pixel> pixels;
  std::vector<std::size_t> region_size{0};
  std::size_t normal_pixels = 0;
  for (std::size_t i = 0; i < heatmaps.size(); ++i) {
    const auto& h = heatmaps[i];
    if (h.values.size() != masks[i].size())
      throw InvalidArgument("aupro: heatmap " + std::to_string(i) + " and its mask differ in size");
    std::uint32_t count = 0;
    const auto local = label_components(masks[i], h.height, h.width, &count);
    const auto base = static_cast<std::uint32_t>(region_size.size() - 1);
    region_size.resize(region_size.size() + count, 0);
    for (std::size_t p = 0; p < local.size(); ++p) {
      if (!std::isfinite(h.values[p])) throw InvalidArgument("aupro: non-finite pixel score");
      const std::uint32_t region = local[p] ? base + local[p] : 0;
      if (region) ++region_size[region];
      else ++normal_pixels;
      pixels.push_back({h.values[p], region});
    }
  }
  const std::size_t regions = region_size.size() - 1;
  if (regions == 0) throw InvalidArgument("aupro: no anomalous pixels in any mask");
  if (normal_pixels == 0) throw InvalidArgument("aupro: no normal pixels to measure false positives");

  std::sort(pixels.begin(), pixels.end(),
            [](const Pixel& a, const Pixel& b) { return a.score > b.score; });

  double area = 0.0;
  double prev_fpr = 0.0, prev_pro = 0.0;
  double overlap_sum = 0.0;
  std::size_t false_positives = 0;
  for (std::size_t i = 0; i < pixels.size();) {
    const double s = pixels[i].score;
    for (; i < pixels.size() && pixels[i].score == s; ++i) {
      if (pixels[i].region) overlap_sum += 1.0 / static_cast<double>(region_size[pixels[i].region]);
      else ++false_positives;
    }
    const double fpr = static_cast<double>(false_positives) / static_cast<double>(normal_pixels);
    const double pro = overlap_sum / static_cast<double>(regions);
    if (fpr >= fpr_limit) {
      const double t = fpr > prev_fpr ? (fpr_limit - prev_fpr) / (fpr - prev_fpr) : 0.0;
      const double pro_at_limit = prev_pro + t * (pro - prev_pro);
      area += (fpr_limit - prev_fpr) * (prev_pro + pro_at_limit) * 0.5;
      return area / fpr_limit;
    }
    area += (fpr - prev_fpr) * (prev_pro + pro) * 0.5;
    prev_fpr = fpr;
    prev_pro = pro;
  }
  // The last group always reaches fpr = 1.
  return area / fpr_limit;
}

RMatrix::RMatrix(std::string metric, std::size_t tasks) : metric_(std::move(metric)), rows_(tasks) {
  for (std::size_t k = 0; k < tasks; ++k) rows_[k].resize(k + 1);
}

void RMatrix::set(std::size_t k, std::size_t t, double value) {
  if (k >= rows_.size() || t > k) throw InvalidArgument("RMatrix entry out of range");
  rows_[k][t] = value;
}

std::optional<double> RMatrix::at(std::size_t k, std::size_t t) const {
  if (k >= rows_.size() || t > k) return std::nullopt;
  return rows_[k][t];
}

bool RMatrix::complete() const {
  for (const auto& row : rows_)
    for (const auto& v : row)
      if (!v) return false;
  return true;
}

std::optional<double> RMatrix::row_mean(std::size_t k) const {
  if (k >= rows_.size()) return std::nullopt;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : rows_[k])
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

RMatrix RMatrix::restrict(std::span<const std::size_t> task_indices) const {
  RMatrix out(metric_, task_indices.size());
  for (std::size_t a = 0; a < task_indices.size(); ++a)
    for (std::size_t b = 0; b <= a; ++b)
      if (auto v = at(task_indices[a], task_indices[b])) out.set(a, b, *v);
  return out;
}

double average_forgetting(const RMatrix& r) {
  const std::size_t T = r.tasks();
  if (T < 2) throw InvalidArgument("average forgetting needs at least two tasks");
  if (!r.complete()) throw InvalidArgument("average forgetting needs a complete R matrix");
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    double best = *r.at(t, t);
    for (std::size_t k = t + 1; k < T; ++k) best = std::max(best, *r.at(k, t));
    total += best - *r.at(T - 1, t);
  }
  return 100.0 * total / static_cast<double>(T - 1);
}

double relative_gap(double f1_joint, double f1_cl) { return f1_joint - f1_cl; }

MemoryReport memory_report(std::uint64_t total_vectors, std::uint64_t dim,
                           std::uint64_t backbone_param_count) {
  return {static_cast<double>(backbone_param_count) * sizeof(float) / kBytesPerMegabyte,
          static_cast<double>(total_vectors) * static_cast<double>(dim) * sizeof(float) /
              kBytesPerMegabyte};
}

MemoryReport memory_report(const MemoryBankSet& set, std::uint64_t backbone_param_count) {
  return memory_report(set.total_vectors(), set.dim(), backbone_param_count);
}

} // namespace pccl
