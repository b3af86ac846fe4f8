#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "master/explain/cross_time.hpp"
#include "master/explain/heatmap.hpp"
#include "master/numerics/ops.hpp"
#include "oracles.hpp"

using namespace master;
using explain::Matrix;
using nn::Tensor;

namespace {

// Random row-stochastic maps: intra [M, heads, tau, tau], inter [tau, heads, M, M].
Tensor stochastic(Rng& rng, nn::Shape shape) {
  const std::size_t n = shape.back();
  std::vector<double> v;
  for (std::size_t r = 0; r < nn::numel(shape) / n; ++r) {
    auto row = oracle::softmax(oracle::random_vec(rng, n));
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor(std::move(shape), v);
}

}  // namespace

TEST_CASE("cross_time_map examples") {
  Rng rng(3);
  const std::size_t m = 3, tau = 4, h1 = 2, h2 = 2;
  auto intra = stochastic(rng, {m, h1, tau, tau});
  auto inter = stochastic(rng, {tau, h2, m, m});

  SUBCASE("uniform inter-stock weights scale the source map") {
    auto uniform = Tensor::full({tau, h2, m, m}, 1.0 / m);
    auto c = explain::cross_time_map(intra, uniform, 0, 2);
    for (std::size_t i = 0; i < tau; ++i)
      for (std::size_t j = 0; j < tau; ++j) {
        const double mean_head = 0.5 * (intra.at({2, 0, i, j}) + intra.at({2, 1, i, j}));
        CHECK(std::abs(c.map.at(i, j) - mean_head / m) < 1e-15);
      }
    CHECK(c.head_mode == "mean");
  }
  SUBCASE("product oracle and row sums") {
    const std::size_t u = 1, v = 2;
    auto c = explain::cross_time_map(intra, inter, u, v);
    for (std::size_t i = 0; i < tau; ++i) {
      const double s2 = 0.5 * (inter.at({i, 0, u, v}) + inter.at({i, 1, u, v}));
      double row = 0.0;
      for (std::size_t j = 0; j < tau; ++j) {
        const double s1 = 0.5 * (intra.at({v, 0, i, j}) + intra.at({v, 1, i, j}));
        CHECK(std::abs(c.map.at(i, j) - s1 * s2) < 1e-12);
        CHECK(c.map.at(i, j) >= 0.0);
        row += c.map.at(i, j);
      }
      CHECK(std::abs(row - s2) < 1e-9);
    }
    auto swapped = explain::cross_time_map(intra, inter, v, u);
    CHECK_FALSE(swapped.map == c.map);
  }
  SUBCASE("single heads") {
    explain::HeadSelection sel{1, 0};
    auto c = explain::cross_time_map(intra, inter, 0, 1, sel);
    CHECK(c.head_mode == "intra1_inter0");
    CHECK(c.map.at(2, 3) == intra.at({1, 1, 2, 3}) * inter.at({2, 0, 0, 1}));
  }
  CHECK_THROWS(explain::cross_time_map(intra, inter, 3, 0));
  CHECK_THROWS(explain::cross_time_map(intra, inter, 0, 0, {5, {}}));

  auto s2 = explain::inter_stock_map(inter, 1);
  CHECK(s2.rows == m);
  CHECK(std::abs(s2.at(0, 1) - 0.5 * (inter.at({1, 0, 0, 1}) + inter.at({1, 1, 0, 1}))) < 1e-15);
  CHECK_THROWS(explain::inter_stock_map(inter, tau));
}

TEST_CASE("heatmap_pixels examples") {
  using explain::Normalization;
  CHECK(explain::heatmap_pixels({1, 1, {0.5}}, Normalization::global_max) == std::vector<int>{255});
  CHECK(explain::heatmap_pixels({2, 2, {0, 0, 0, 0}}, Normalization::global_max) ==
        std::vector<int>{0, 0, 0, 0});
  Matrix m{2, 2, {0, 1, 2, 4}};
  // round(255 * v / 4)
  CHECK(explain::heatmap_pixels(m, Normalization::global_max) == std::vector<int>{0, 64, 128, 255});
  CHECK(explain::heatmap_pixels(m, Normalization::row_max) == std::vector<int>{0, 255, 128, 255});
  CHECK_THROWS(explain::heatmap_pixels({1, 2, {1, -1}}, Normalization::global_max));
  CHECK_THROWS(explain::heatmap_pixels({1, 1, {std::nan("")}}, Normalization::global_max));
}

TEST_CASE("heatmap export round trips") {
  Rng rng(6);
  Matrix m{3, 4, {}};
  for (int i = 0; i < 12; ++i) m.values.push_back(std::abs(rng.normal()) * 1e-3);
  auto dir = std::filesystem::temp_directory_path() / "master_explain_test";
  std::filesystem::create_directories(dir);
  explain::export_heatmap(m, dir / "map.pgm", explain::Normalization::global_max);
  CHECK(explain::read_matrix_csv(dir / "map.csv") == m);
  auto pgm = explain::read_pgm(dir / "map.pgm");
  CHECK(pgm.width == 4);
  CHECK(pgm.height == 3);
  CHECK(pgm.max_value == 255);
  CHECK(pgm.pixels == explain::heatmap_pixels(m, explain::Normalization::global_max));

  CHECK_THROWS(explain::export_heatmap(m, dir / "missing_dir" / "x.pgm",
                                       explain::Normalization::global_max));
}

TEST_CASE("lag_band_profile") {
  // 4x4 map with all mass on lag i - j = 2.
  Matrix m{4, 4, std::vector<double>(16, 0.0)};
  m.values[2 * 4 + 0] = 1.0;
  m.values[3 * 4 + 1] = 1.0;
  auto p = explain::lag_band_profile(m);
  CHECK(p.first_lag == -3);
  // Lags -3..3 give five bands of width three.
  REQUIRE(p.mass.size() == 5);
  // Lags 0..2 span 9 cells, lags 1..3 span 6; both hold mass 2.
  CHECK(p.mass_at(0) == doctest::Approx(2.0 / 9.0));
  CHECK(p.mass_at(1) == doctest::Approx(2.0 / 6.0));
  CHECK(p.mass_at(-3) == 0.0);
  CHECK(p.peak_lag() == 1);
  CHECK_THROWS(explain::lag_band_profile({2, 3, std::vector<double>(6, 0.0)}));
}
