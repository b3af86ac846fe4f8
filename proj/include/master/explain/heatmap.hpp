#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace master::explain {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

enum class Normalization { global_max, row_max };

// round(255 * v / max) with max taken globally or per row; a zero max maps
// its pixels to 0. Values must be finite and non-negative.
std::vector<int> heatmap_pixels(const Matrix& m, Normalization normalization);

// Writes a plain PGM (P2) at `pgm_path` and the raw values beside it with a
// .csv extension.
void export_heatmap(const Matrix& m, const std::filesystem::path& pgm_path,
                    Normalization normalization);

// Headerless rows of comma-separated decimals; parses back exactly.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  int max_value = 0;
  std::vector<int> pixels;
};
Pgm read_pgm(const std::filesystem::path& path);

}  // namespace master::explain
