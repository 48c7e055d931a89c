#include "pccl/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "pccl/errors.hpp"

namespace pccl {

namespace {

std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  // Half-sample symmetric extension: d c b a | a b c d | d c b a
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

void blur_axis(std::vector<double>& data, std::size_t h, std::size_t w,
               std::span<const double> kernel, bool along_rows) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> out(data.size());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t o = -radius; o <= radius; ++o) {
        const double k = kernel[static_cast<std::size_t>(o + radius)];
        if (along_rows)
          acc += k * data[y * w + reflect(static_cast<std::ptrdiff_t>(x) + o, static_cast<std::ptrdiff_t>(w))];
        else
          acc += k * data[reflect(static_cast<std::ptrdiff_t>(y) + o, static_cast<std::ptrdiff_t>(h)) * w + x];
      }
      out[y * w + x] = acc;
    }
  }
  data = std::move(out);
}

} // namespace

PatchScores patch_scores(const FeatureGrid& grid, const MemoryBank& bank) {
  if (bank.vectors.empty()) throw InvalidArgument("cannot score against an empty bank");
  if (bank.vectors.dim() != grid.dim())
    throw InvalidArgument("grid dim " + std::to_string(grid.dim()) + " does not match bank dim " +
                          std::to_string(bank.vectors.dim()));
  PatchScores out;
  out.scores.height = grid.grid_h;
  out.scores.width = grid.grid_w;
  out.scores.values.resize(grid.cells());
  out.nearest.resize(grid.cells());
  const std::size_t m = bank.size();
  for (std::size_t p = 0; p < grid.cells(); ++p) {
    const auto q = grid.patches.row(p);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = squared_distance(q, bank.vectors.row(j));
      if (d < best) {
        best = d;
        best_idx = j;
      }
    }
    out.scores.values[p] = std::sqrt(best);
    out.nearest[p] = best_idx;
  }
  return out;
}

double image_score(std::span<const double> patch_scores) {
  if (patch_scores.empty()) throw InvalidArgument("image score of an empty score grid");
  return *std::max_element(patch_scores.begin(), patch_scores.end());
}

double image_score(const PatchScores& scores, const FeatureGrid& grid, const MemoryBank& bank,
                   const ScoringParams& params) {
  const auto& values = scores.scores.values;
  if (values.empty()) throw InvalidArgument("image score of an empty score grid");
  const auto top = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  const double s = values[top];
  if (params.reweight_neighbors == 0) return s;

  const std::size_t anchor = scores.nearest[top];
  const std::size_t b = std::min<std::size_t>(params.reweight_neighbors, bank.size());

  // b-nearest support of the anchor inside the bank, anchor first.
  std::vector<std::size_t> others;
  others.reserve(bank.size() - 1);
  for (std::size_t j = 0; j < bank.size(); ++j)
    if (j != anchor) others.push_back(j);
  std::vector<double> to_anchor(bank.size());
  for (std::size_t j : others)
    to_anchor[j] = squared_distance(bank.vectors.row(j), bank.vectors.row(anchor));
  const auto take = static_cast<std::ptrdiff_t>(b - 1);
  std::partial_sort(others.begin(), others.begin() + take, others.end(),
                    [&](std::size_t a, std::size_t c) {
                      return to_anchor[a] != to_anchor[c] ? to_anchor[a] < to_anchor[c] : a < c;
                    });

  const auto query = grid.patches.row(top);
  std::vector<double> dists{s};
  for (std::ptrdiff_t i = 0; i < take; ++i)
    dists.push_back(std::sqrt(squared_distance(query, bank.vectors.row(others[static_cast<std::size_t>(i)]))));
  const double dmax = *std::max_element(dists.begin(), dists.end());
  double denom = 0.0;
  for (double d : dists) denom += std::exp(d - dmax);
  const double weight = 1.0 - std::exp(s - dmax) / denom;
  return weight * s;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("smoothing sigma must be nonnegative");
  if (sigma == 0.0) return {1.0};
  const auto radius = static_cast<std::size_t>(4.0 * sigma + 0.5);
  std::vector<double> k(2 * radius + 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-0.5 * x * x / (sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

ScoreMap heatmap(const ScoreMap& patch_scores, const ImageGeometry& geometry, double sigma) {
  if (geometry.img_h == 0 || geometry.img_w == 0) throw InvalidArgument("image geometry must be positive");
  if (patch_scores.height == 0 || patch_scores.width == 0)
    throw InvalidArgument("heatmap of an empty score grid");
  const auto kernel = gaussian_kernel(sigma);

  const std::size_t gh = patch_scores.height, gw = patch_scores.width;
  const std::size_t h = geometry.img_h, w = geometry.img_w;
  auto source = [](std::size_t dst, std::size_t in, std::size_t out) {
    const double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(in - 1));
  };

  ScoreMap map{geometry.img_h, geometry.img_w, std::vector<double>(h * w)};
  for (std::size_t y = 0; y < h; ++y) {
    const double sy = source(y, gh, h);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, gh - 1);
    const double wy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < w; ++x) {
      const double sx = source(x, gw, w);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, gw - 1);
      const double wx = sx - static_cast<double>(x0);
      const auto& v = patch_scores.values;
      const double top = v[y0 * gw + x0] * (1.0 - wx) + v[y0 * gw + x1] * wx;
      const double bottom = v[y1 * gw + x0] * (1.0 - wx) + v[y1 * gw + x1] * wx;
      map.values[y * w + x] = top * (1.0 - wy) + bottom * wy;
    }
  }
  if (kernel.size() > 1) {
    blur_axis(map.values, h, w, kernel, true);
    blur_axis(map.values, h, w, kernel, false);
  }
  return map;
}

AnomalyResult score_against(const FeatureGrid& grid, const MemoryBank& bank,
                            const ScoringParams& params) {
  auto ps = patch_scores(grid, bank);
  AnomalyResult r;
  r.image_score = image_score(ps, grid, bank, params);
  r.routed_task = bank.task_index;
  r.heatmap = heatmap(ps.scores, grid.geometry, params.smoothing_sigma);
  r.patch_scores = std::move(ps.scores);
  return r;
}

AnomalyResult route_and_score(const FeatureGrid& grid, const MemoryBankSet& set,
                              const ScoringParams& params) {
  if (set.empty()) throw InvalidArgument("cannot route against an empty bank set");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  PatchScores best_scores;
  for (std::size_t j = 0; j < set.banks().size(); ++j) {
    auto ps = patch_scores(grid, set.banks()[j]);
    const double s = image_score(ps, grid, set.banks()[j], params);
    if (s < best_score) {
      best_score = s;
      best = j;
      best_scores = std::move(ps);
    }
  }
  AnomalyResult r;
  r.image_score = best_score;
  r.routed_task = static_cast<std::uint32_t>(best);
  r.heatmap = heatmap(best_scores.scores, grid.geometry, params.smoothing_sigma);
  r.patch_scores = std::move(best_scores.scores);
  return r;
}

std::vector<std::uint8_t> to_u8(const ScoreMap& map) {
  std::vector<std::uint8_t> out(map.values.size(), 0);
  if (map.values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround((map.values[i] - *lo) / range * 255.0));
  return out;
}

void write_heatmap_f32(const ScoreMap& map, const std::filesystem::path& path) {
  detail::ByteWriter w;
  for (double v : map.values) w.put_f32(static_cast<float>(v));
  detail::write_file_bytes(path, w.bytes());
}

void write_heatmap_pgm(const ScoreMap& map, const std::filesystem::path& path) {
  const std::string header =
      "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  detail::ByteWriter w;
  w.put_bytes({reinterpret_cast<const std::uint8_t*>(header.data()), header.size()});
  w.put_bytes(to_u8(map));
  detail::write_file_bytes(path, w.bytes());
}

} // namespace pccl
