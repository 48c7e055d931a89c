#include <cmath>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "pccl/errors.hpp"
#include "pccl/scoring.hpp"
#include "test_util.hpp"

using namespace pccl;

namespace {

FeatureGrid grid_of(std::uint32_t h, std::uint32_t w, std::size_t dim, std::vector<float> values,
                    ImageGeometry geom = {8, 8}) {
  FeatureGrid g;
  g.grid_h = h;
  g.grid_w = w;
  g.geometry = geom;
  g.patches = PatchMatrix(dim, std::move(values));
  return g;
}

MemoryBank bank_of(std::size_t dim, std::vector<float> values, std::uint32_t task = 0) {
  return {task, "b" + std::to_string(task), PatchMatrix(dim, std::move(values))};
}

PatchMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t dim, double offset) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> v(n * dim);
  for (auto& x : v) x = static_cast<float>(offset) + normal(rng);
  return PatchMatrix(dim, std::move(v));
}

} // namespace

TEST_CASE("patch_scores: 3-4-5 triangle") {
  const auto g = grid_of(1, 1, 2, {3, 4});
  const auto s = patch_scores(g, bank_of(2, {0, 0}));
  CHECK(s.scores.values == std::vector<double>{5.0});
  CHECK(s.nearest == std::vector<std::size_t>{0});
}

TEST_CASE("patch_scores: patches stored in the bank score zero") {
  std::mt19937_64 rng(1);
  const auto g = testing::random_grid(rng, 3, 4, 5, {8, 8}, false);
  auto bank_vectors = random_matrix(rng, 10, 5, 0.0);
  bank_vectors.append_rows(g.patches);
  const MemoryBank bank{0, "b", bank_vectors};
  const auto s = patch_scores(g, bank);
  for (double v : s.scores.values) CHECK(v == 0.0);
  CHECK(image_score(s.scores.values) == 0.0);
  CHECK(image_score(s, g, bank, {.reweight_neighbors = 3}) == 0.0);
}

TEST_CASE("patch_scores equals the exhaustive pairwise minimum") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng() % 6;
    const auto g = testing::random_grid(rng, 1 + rng() % 4, 1 + rng() % 4, static_cast<std::uint32_t>(dim), {8, 8}, false);
    const MemoryBank bank{0, "b", random_matrix(rng, 1 + rng() % 30, dim, 0.0)};
    const auto s = patch_scores(g, bank);
    for (std::size_t p = 0; p < g.cells(); ++p) {
      oracle::Point q(g.patches.row(p).begin(), g.patches.row(p).end());
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < bank.size(); ++j)
        best = std::min(best, oracle::dist(q, {bank.vectors.row(j).begin(), bank.vectors.row(j).end()}));
      CHECK(s.scores.values[p] == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("patch_scores: errors") {
  const auto g = grid_of(1, 1, 2, {3, 4});
  CHECK_THROWS_AS(patch_scores(g, MemoryBank{0, "e", PatchMatrix(2)}), InvalidArgument);
  CHECK_THROWS_AS(patch_scores(g, bank_of(3, {0, 0, 0})), InvalidArgument);
  CHECK_THROWS_AS(image_score(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("image_score: plain maximum") {
  CHECK(image_score(std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(image_score(std::vector<double>{0.1, 0.9, 0.3}) == 0.9);
}

TEST_CASE("image_score: softmax reweighting on a three-vector bank") {
  // Query (3,0); nearest bank vector (1,0) at distance 2. Its neighbours in
  // the bank by distance: itself, (0,0) at 1, (0,2) at sqrt(5).
  const auto g = grid_of(1, 1, 2, {3, 0});
  const auto bank = bank_of(2, {0, 0, 1, 0, 0, 2});
  const auto s = patch_scores(g, bank);
  REQUIRE(s.nearest[0] == 1);

  const double d_self = 2.0, d_origin = 3.0, d_far = std::sqrt(13.0);
  const double w2 = 1.0 - std::exp(d_self) / (std::exp(d_self) + std::exp(d_origin));
  const double w3 = 1.0 - std::exp(d_self) / (std::exp(d_self) + std::exp(d_origin) + std::exp(d_far));
  CHECK(image_score(s, g, bank, {.reweight_neighbors = 2}) == doctest::Approx(w2 * 2.0).epsilon(1e-12));
  CHECK(image_score(s, g, bank, {.reweight_neighbors = 3}) == doctest::Approx(w3 * 2.0).epsilon(1e-12));
  // b beyond the bank size clamps to the whole bank.
  CHECK(image_score(s, g, bank, {.reweight_neighbors = 9}) == doctest::Approx(w3 * 2.0).epsilon(1e-12));
  CHECK(image_score(s, g, bank, {.reweight_neighbors = 0}) == 2.0);
}

TEST_CASE("adding bank vectors never increases a patch score") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testing::random_grid(rng, 3, 3, 4, {8, 8}, false);
    MemoryBank bank{0, "b", random_matrix(rng, 5, 4, 0.0)};
    auto before = patch_scores(g, bank).scores.values;
    bank.vectors.append_rows(random_matrix(rng, 5, 4, 0.0));
    const auto after = patch_scores(g, bank).scores.values;
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] <= before[i]);
  }
}

TEST_CASE("route_and_score: single bank reduces to scoring against it") {
  std::mt19937_64 rng(4);
  const auto g = testing::random_grid(rng, 4, 4, 3, {16, 16}, false);
  MemoryBankSet set(100, 3);
  set.push_back({0, "only", random_matrix(rng, 20, 3, 0.0)});
  const ScoringParams params{.reweight_neighbors = 0, .smoothing_sigma = 2.0};
  const auto r = route_and_score(g, set, params);
  const auto ps = patch_scores(g, set.banks()[0]);
  CHECK(r.routed_task == 0);
  CHECK(r.patch_scores.values == ps.scores.values);
  CHECK(r.image_score == image_score(ps.scores.values));
  CHECK(r.heatmap.values == heatmap(ps.scores, g.geometry, 2.0).values);
}

TEST_CASE("route_and_score: query near the second cluster routes there") {
  std::mt19937_64 rng(5);
  MemoryBankSet set(100, 3);
  set.push_back({0, "origin", random_matrix(rng, 30, 3, 0.0)});
  set.push_back({1, "far", random_matrix(rng, 30, 3, 100.0)});
  for (int trial = 0; trial < 10; ++trial) {
    auto g = testing::random_grid(rng, 2, 2, 3, {8, 8}, false);
    std::vector<float> v(g.patches.values().begin(), g.patches.values().end());
    for (auto& x : v) x = 100.0f + x / 10.0f;
    g.patches = PatchMatrix(3, v);

    const auto r = route_and_score(g, set, {});
    double per_bank[2];
    for (int b = 0; b < 2; ++b) per_bank[b] = image_score(patch_scores(g, set.banks()[b]).scores.values);
    CHECK(r.routed_task == 1);
    CHECK(r.image_score == per_bank[1]);
    CHECK(per_bank[1] < per_bank[0]);
    CHECK(r.image_score < 5.0);
  }
}

TEST_CASE("route_and_score: equidistant banks route to the lower index") {
  const auto g = grid_of(1, 1, 1, {0});
  MemoryBankSet set(10, 1);
  set.push_back(bank_of(1, {2}, 0));
  set.push_back(bank_of(1, {-2}, 1));
  CHECK(route_and_score(g, set, {}).routed_task == 0);
  CHECK_THROWS_AS(route_and_score(g, MemoryBankSet(10, 1), {}), InvalidArgument);
}

TEST_CASE("routing is unchanged by a strictly increasing transform of distances") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    MemoryBankSet set(100, 2);
    for (std::uint32_t b = 0; b < 4; ++b) set.push_back({b, "b", random_matrix(rng, 8, 2, 3.0 * b)});
    const auto g = testing::random_grid(rng, 3, 3, 2, {6, 6}, false);
    const auto r = route_and_score(g, set, {});
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < 4; ++b) {
      const auto d = patch_scores(g, set.banks()[b]).scores.values;
      double worst = -std::numeric_limits<double>::infinity();
      for (double x : d) worst = std::max(worst, std::exp(x) + x * x * x);
      if (worst < best_value) {
        best_value = worst;
        best = b;
      }
    }
    CHECK(r.routed_task == best);
  }
}

TEST_CASE("gaussian kernel sums to one") {
  for (double sigma : {0.0, 0.5, 1.0, 4.0, 7.3}) {
    const auto k = gaussian_kernel(sigma);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k.size() % 2 == 1);
  }
  CHECK(gaussian_kernel(4.0).size() == 33);
  CHECK_THROWS_AS(gaussian_kernel(-1.0), InvalidArgument);
}

TEST_CASE("heatmap: constant scores give a constant map") {
  const ScoreMap scores{4, 4, std::vector<double>(16, 2.5)};
  for (double sigma : {0.0, 1.0, 4.0}) {
    const auto h = heatmap(scores, {32, 24}, sigma);
    CHECK(h.height == 32);
    CHECK(h.width == 24);
    for (double v : h.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-6));
  }
}

TEST_CASE("heatmap: sigma 0 is a bilinear upsample with half-pixel centres") {
  const ScoreMap scores{2, 2, {0, 4, 8, 12}};
  const auto h = heatmap(scores, {4, 4}, 0.0);
  // Source coordinate of pixel x is (x + 0.5) / 2 - 0.5 -> -0.25, 0.25, 0.75, 1.25.
  const std::vector<double> expected{0, 1, 3, 4, 2, 3, 5, 6, 6, 7, 9, 10, 8, 9, 11, 12};
  for (std::size_t i = 0; i < 16; ++i) CHECK(h.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("heatmap: a single hot patch peaks inside its footprint") {
  const std::uint32_t grid = 7, img = 56;
  for (std::uint32_t gy : {0u, 3u, 6u}) {
    for (std::uint32_t gx : {1u, 5u}) {
      ScoreMap scores{grid, grid, std::vector<double>(grid * grid, 0.0)};
      scores.values[gy * grid + gx] = 1.0;
      const auto h = heatmap(scores, {img, img}, 4.0);
      const auto arg = static_cast<std::size_t>(std::max_element(h.values.begin(), h.values.end()) - h.values.begin());
      const std::uint32_t py = static_cast<std::uint32_t>(arg / img), px = static_cast<std::uint32_t>(arg % img);
      const std::uint32_t cell = img / grid;
      CHECK(py >= gy * cell);
      CHECK(py < (gy + 1) * cell);
      CHECK(px >= gx * cell);
      CHECK(px < (gx + 1) * cell);
    }
  }
}

TEST_CASE("heatmap: blur preserves the mean when the border is quiet") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  ScoreMap scores{12, 12, std::vector<double>(144, 0.0)};
  for (std::uint32_t y = 4; y < 8; ++y)
    for (std::uint32_t x = 4; x < 8; ++x) scores.values[y * 12 + x] = u(rng);
  const auto raw = heatmap(scores, {96, 96}, 0.0);
  const auto blurred = heatmap(scores, {96, 96}, 3.0);
  const double m0 = std::accumulate(raw.values.begin(), raw.values.end(), 0.0);
  const double m1 = std::accumulate(blurred.values.begin(), blurred.values.end(), 0.0);
  CHECK(m1 == doctest::Approx(m0).epsilon(1e-9));
  for (double v : blurred.values) CHECK(v >= 0.0);
}

TEST_CASE("heatmap export: u8 normalisation and raw files") {
  const ScoreMap map{2, 2, {1.0, 2.0, 3.0, 5.0}};
  CHECK(to_u8(map) == std::vector<std::uint8_t>{0, 64, 128, 255});
  CHECK(to_u8(ScoreMap{1, 2, {7.0, 7.0}}) == std::vector<std::uint8_t>{0, 0});

  testing::TempDir dir("heat");
  write_heatmap_f32(map, dir / "h.f32");
  write_heatmap_pgm(map, dir / "h.pgm");
  std::ifstream f32(dir / "h.f32", std::ios::binary);
  std::vector<float> back(4);
  f32.read(reinterpret_cast<char*>(back.data()), 16);
  CHECK(back == std::vector<float>{1.0f, 2.0f, 3.0f, 5.0f});
  std::ifstream pgm(dir / "h.pgm", std::ios::binary);
  std::string content{std::istreambuf_iterator<char>(pgm), {}};
  CHECK(content.substr(0, 11) == "P5\n2 2\n255\n");
  CHECK(content.size() == 15);
}
