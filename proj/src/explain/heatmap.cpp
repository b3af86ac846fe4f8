#include "master/explain/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "master/market_data/csv_io.hpp"

namespace master::explain {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<int> heatmap_pixels(const Matrix& m, Normalization normalization) {
  if (m.values.size() != m.rows * m.cols) throw std::invalid_argument("heatmap: bad matrix size");
  for (double v : m.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("heatmap: values must be finite and non-negative");
    }
  }
  const double global = m.values.empty() ? 0.0 : *std::max_element(m.values.begin(), m.values.end());
  std::vector<int> pixels(m.values.size(), 0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double scale = global;
    if (normalization == Normalization::row_max) {
      scale = 0.0;
      for (std::size_t c = 0; c < m.cols; ++c) scale = std::max(scale, m.at(r, c));
    }
    if (scale == 0.0) continue;
    for (std::size_t c = 0; c < m.cols; ++c)
      pixels[r * m.cols + c] = static_cast<int>(std::lround(255.0 * m.at(r, c) / scale));
  }
  return pixels;
}

void export_heatmap(const Matrix& m, const std::filesystem::path& pgm_path,
                    Normalization normalization) {
  const auto pixels = heatmap_pixels(m, normalization);
  {
    auto out = open_out(pgm_path);
    out << "P2\n" << m.cols << ' ' << m.rows << "\n255\n";
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) out << (c ? " " : "") << pixels[r * m.cols + c];
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + pgm_path.string());
  }
  auto csv = pgm_path;
  csv.replace_extension(".csv");
  write_matrix_csv(m, csv);
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c)
      out << (c ? "," : "") << data::format_decimal(m.at(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Matrix m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = data::split_csv_line(line);
    if (m.rows == 0) m.cols = cells.size();
    if (cells.size() != m.cols) {
      throw std::runtime_error(path.string() + ": ragged row " + std::to_string(m.rows + 1));
    }
    for (const auto& c : cells) m.values.push_back(data::parse_decimal(c));
    ++m.rows;
  }
  return m;
}

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  Pgm pgm;
  in >> magic >> pgm.width >> pgm.height >> pgm.max_value;
  if (magic != "P2" || !in) throw std::runtime_error(path.string() + ": not a plain PGM");
  pgm.pixels.resize(pgm.width * pgm.height);
  for (auto& p : pgm.pixels)
    if (!(in >> p)) throw std::runtime_error(path.string() + ": truncated pixel data");
  return pgm;
}

}  // namespace master::explain
