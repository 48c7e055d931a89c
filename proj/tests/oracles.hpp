#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Farthest-first by recomputing every point's distance to all centers each round.
inline std::vector<std::size_t> farthest_first(const std::vector<Point>& pts, std::size_t k, std::size_t start) {
  if (pts.size() <= k) {
    std::vector<std::size_t> all(pts.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  std::vector<std::size_t> centers{start};
  while (centers.size() < std::min(k, pts.size())) {
    std::size_t best = pts.size();
    double best_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(centers.begin(), centers.end(), i) != centers.end()) continue;
      double m = std::numeric_limits<double>::infinity();
      for (auto c : centers) m = std::min(m, dist(pts[i], pts[c]));
      if (m > best_d) {
        best_d = m;
        best = i;
      }
    }
    centers.push_back(best);
  }
  return centers;
}

inline double radius(const std::vector<Point>& pts, const std::vector<std::size_t>& centers) {
  double r = 0.0;
  for (const auto& p : pts) {
    double m = std::numeric_limits<double>::infinity();
    for (auto c : centers) m = std::min(m, dist(p, pts[c]));
    r = std::max(r, m);
  }
  return r;
}

/// Optimal k-center radius over all C(n, k) center subsets.
inline double optimal_radius(const std::vector<Point>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(std::min(k, n)), true);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) c.push_back(i);
    best = std::min(best, radius(pts, c));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

/// Pairwise Mann-Whitney comparison.
inline double auroc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        if (s[i] > s[j]) wins += 1.0;
        else if (s[i] == s[j]) wins += 0.5;
      }
  return wins / pairs;
}

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

inline Counts count_at(const std::vector<double>& s, const std::vector<std::uint8_t>& y, double thr) {
  Counts c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool pred = s[i] >= thr;
    if (pred && y[i]) c.tp++;
    else if (pred && !y[i]) c.fp++;
    else if (!pred && y[i]) c.fn++;
  }
  return c;
}

inline std::vector<double> distinct_desc(std::vector<double> s) {
  std::sort(s.begin(), s.end(), std::greater<>());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// Max F1 over +inf, every midpoint between distinct scores, and -inf.
inline double best_f1(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  const auto d = distinct_desc(s);
  std::vector<double> cuts{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < d.size(); ++i) cuts.push_back(0.5 * (d[i] + d[i + 1]));
  double best = 0.0;
  for (double t : cuts) {
    const auto c = count_at(s, y, t);
    const double f1 = c.tp == 0 ? 0.0 : 2 * c.tp / (2 * c.tp + c.fp + c.fn);
    best = std::max(best, f1);
  }
  return best;
}

inline double average_precision(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double positives = 0;
  for (auto v : y) positives += v;
  double ap = 0.0, prev_r = 0.0;
  for (double t : distinct_desc(s)) {
    const auto c = count_at(s, y, t);
    const double r = c.tp / positives;
    const double p = c.tp / (c.tp + c.fp);
    ap += (r - prev_r) * p;
    prev_r = r;
  }
  return ap;
}

/// 4-connected regions via union-find.
inline std::vector<int> regions(const std::vector<std::uint8_t>& m, int h, int w) {
  std::vector<int> parent(m.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      if (!m[i]) continue;
      if (x + 1 < w && m[i + 1]) parent[find(i)] = find(i + 1);
      if (y + 1 < h && m[i + w]) parent[find(i)] = find(i + w);
    }
  std::vector<int> out(m.size(), -1);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out[i] = find(static_cast<int>(i));
  return out;
}

/// AUPRO by recounting FPR and per-region overlap at every distinct threshold.
inline double aupro(const std::vector<std::vector<double>>& maps, const std::vector<std::vector<std::uint8_t>>& masks,
                    int h, int w, double limit) {
  struct Region {
    std::size_t image;
    int root;
  };
  std::vector<std::vector<int>> reg;
  std::vector<Region> all;
  std::vector<double> scores;
  double normals = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    reg.push_back(regions(masks[i], h, w));
    std::set<int> roots;
    for (std::size_t p = 0; p < masks[i].size(); ++p) {
      if (reg[i][p] >= 0) roots.insert(reg[i][p]);
      else normals++;
      scores.push_back(maps[i][p]);
    }
    for (int r : roots) all.push_back({i, r});
  }
  std::vector<std::pair<double, double>> curve{{0.0, 0.0}};
  for (double t : distinct_desc(scores)) {
    double fp = 0;
    for (std::size_t i = 0; i < maps.size(); ++i)
      for (std::size_t p = 0; p < maps[i].size(); ++p)
        if (reg[i][p] < 0 && maps[i][p] >= t) fp++;
    double pro = 0;
    for (const auto& r : all) {
      double in = 0, hit = 0;
      for (std::size_t p = 0; p < maps[r.image].size(); ++p)
        if (reg[r.image][p] == r.root) {
          in++;
          if (maps[r.image][p] >= t) hit++;
        }
      pro += hit / in;
    }
    curve.push_back({fp / normals, pro / static_cast<double>(all.size())});
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    auto [f0, p0] = curve[i - 1];
    auto [f1, p1] = curve[i];
    if (f0 >= limit) break;
    if (f1 > limit) {
      p1 = p0 + (p1 - p0) * (limit - f0) / (f1 - f0);
      f1 = limit;
    }
    area += (f1 - f0) * (p0 + p1) / 2;
  }
  return area / limit;
}

} // namespace oracle
