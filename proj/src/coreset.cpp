#include "pccl/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pccl/errors.hpp"

namespace pccl {

namespace {

PatchMatrix random_projection(const PatchMatrix& points, std::size_t out_dim, std::uint64_t seed) {
  const std::size_t d = points.dim();
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(out_dim)));
  std::vector<double> proj(out_dim * d);
  for (double& v : proj) v = normal(rng);

  std::vector<float> out;
  out.reserve(points.rows() * out_dim);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto p = points.row(i);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += proj[o * d + j] * p[j];
      out.push_back(static_cast<float>(acc));
    }
  }
  return PatchMatrix(out_dim, std::move(out));
}

// min_dist[i] = min(min_dist[i], |p_i - center|^2); returns the first index
// of the largest updated value. Small dims get a fixed-size inner loop.
template <std::size_t D>
std::size_t relax_fixed(const float* base, std::size_t n, std::size_t d, const double* center,
                        double* min_dist) {
  const std::size_t dim = D ? D : d;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = base + i * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = static_cast<double>(p[j]) - center[j];
      acc += diff * diff;
    }
    const double m = std::min(min_dist[i], acc);
    min_dist[i] = m;
    if (m > best) {
      best = m;
      arg = i;
    }
  }
  return arg;
}

std::size_t relax(const float* base, std::size_t n, std::size_t d, const double* center, double* min_dist) {
  switch (d) {
  case 1: return relax_fixed<1>(base, n, d, center, min_dist);
  case 2: return relax_fixed<2>(base, n, d, center, min_dist);
  case 3: return relax_fixed<3>(base, n, d, center, min_dist);
  case 4: return relax_fixed<4>(base, n, d, center, min_dist);
  case 8: return relax_fixed<8>(base, n, d, center, min_dist);
  case 16: return relax_fixed<16>(base, n, d, center, min_dist);
  default: return relax_fixed<0>(base, n, d, center, min_dist);
  }
}

} // namespace

std::size_t coreset_start_index(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw InvalidArgument("coreset input is empty");
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(rng() % n);
}

std::vector<std::size_t> farthest_first(const PatchMatrix& points, std::size_t k,
                                        std::size_t start) {
  const std::size_t n = points.rows();
  if (n == 0) throw InvalidArgument("coreset input is empty");
  if (k == 0) throw InvalidArgument("coreset target size must be at least 1");
  if (start >= n) throw InvalidArgument("coreset start index out of range");

  std::vector<std::size_t> chosen;
  if (n <= k) {
    chosen.resize(n);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    return chosen;
  }

  chosen.reserve(k);
  // Chosen points hold -1 so they never win the argmax again, while
  // duplicates of a center still compete at distance 0.
  const std::size_t d = points.dim();
  const float* base = points.values().data();
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<double> center(d);
  std::size_t current = start;
  for (;;) {
    chosen.push_back(current);
    min_dist[current] = -1.0;
    if (chosen.size() == k) break;

    for (std::size_t j = 0; j < d; ++j) center[j] = base[current * d + j];
    // First maximum, so ties go to the lowest index.
    current = relax(base, n, d, center.data(), min_dist.data());
  }
  return chosen;
}

std::vector<std::size_t> coreset_subsample(const PatchMatrix& points, const CoresetParams& params) {
  const std::size_t n = points.rows();
  if (n == 0) throw InvalidArgument("coreset input is empty");
  if (params.target_size == 0) throw InvalidArgument("coreset target size must be at least 1");
  const std::size_t start = coreset_start_index(params.seed, n);
  if (params.projection_dim && n > params.target_size) {
    const std::size_t pd = *params.projection_dim;
    if (pd == 0 || pd >= points.dim())
      throw InvalidArgument("projection_dim must be in [1, " + std::to_string(points.dim()) + ")");
    return farthest_first(random_projection(points, pd, params.seed), params.target_size, start);
  }
  return farthest_first(points, params.target_size, start);
}

double coverage_radius(const PatchMatrix& points, std::span<const std::size_t> centers) {
  if (centers.empty()) throw InvalidArgument("coverage radius needs at least one center");
  for (std::size_t c : centers)
    if (c >= points.rows()) throw InvalidArgument("center index out of range");
  double worst = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) best = std::min(best, squared_distance(points.row(i), points.row(c)));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

} // namespace pccl
