#include "master/explain/cross_time.hpp"

#include <algorithm>
#include <stdexcept>

namespace master::explain {

namespace {

// Head-aggregated [rows x cols] block of a [..., heads, rows, cols] map at
// leading index `outer`.
Matrix head_block(const nn::Tensor& maps, std::size_t outer, std::optional<std::size_t> head) {
  const std::size_t heads = maps.dim(1);
  const std::size_t rows = maps.dim(2);
  const std::size_t cols = maps.dim(3);
  if (head && *head >= heads) {
    throw std::out_of_range("head " + std::to_string(*head) + " out of range (" +
                            std::to_string(heads) + " heads)");
  }
  Matrix out{rows, cols, std::vector<double>(rows * cols, 0.0)};
  const auto values = maps.values();
  const std::size_t block = rows * cols;
  for (std::size_t h = 0; h < heads; ++h) {
    if (head && h != *head) continue;
    const double w = head ? 1.0 : 1.0 / static_cast<double>(heads);
    const std::size_t base = (outer * heads + h) * block;
    for (std::size_t i = 0; i < block; ++i) out.values[i] += w * values[base + i];
  }
  return out;
}

void check_maps(const nn::Tensor& intra, const nn::Tensor& inter) {
  if (intra.rank() != 4 || inter.rank() != 4 || intra.dim(2) != intra.dim(3) ||
      inter.dim(2) != inter.dim(3) || intra.dim(0) != inter.dim(2) ||
      intra.dim(2) != inter.dim(0)) {
    throw nn::ShapeError("cross_time_map: intra " + nn::to_string(intra.shape()) + " and inter " +
                         nn::to_string(inter.shape()) + " maps are not from one forward pass");
  }
}

}  // namespace

std::string HeadSelection::label() const {
  if (!intra_head && !inter_head) return "mean";
  auto part = [](const std::optional<std::size_t>& h) {
    return h ? std::to_string(*h) : std::string("mean");
  };
  return "intra" + part(intra_head) + "_inter" + part(inter_head);
}

CrossTimeMap cross_time_map(const nn::Tensor& intra, const nn::Tensor& inter, std::size_t target,
                            std::size_t source, const HeadSelection& heads) {
  check_maps(intra, inter);
  const std::size_t m = intra.dim(0);
  const std::size_t tau = intra.dim(2);
  if (target >= m || source >= m) {
    throw std::out_of_range("cross_time_map: stock index out of range for M = " +
                            std::to_string(m));
  }
  const Matrix local = head_block(intra, source, heads.intra_head);
  CrossTimeMap out{target, source, {tau, tau, std::vector<double>(tau * tau)}, heads.label()};
  for (std::size_t i = 0; i < tau; ++i) {
    const double weight = head_block(inter, i, heads.inter_head).at(target, source);
    for (std::size_t j = 0; j < tau; ++j) out.map.values[i * tau + j] = local.at(i, j) * weight;
  }
  return out;
}

Matrix inter_stock_map(const nn::Tensor& inter, std::size_t step, const HeadSelection& heads) {
  if (inter.rank() != 4) throw nn::ShapeError("inter_stock_map: expected [tau, N2, M, M]");
  if (step >= inter.dim(0)) {
    throw std::out_of_range("inter_stock_map: step " + std::to_string(step) +
                            " out of range for tau = " + std::to_string(inter.dim(0)));
  }
  return head_block(inter, step, heads.inter_head);
}

int LagBandProfile::peak_lag() const {
  if (mass.empty()) throw std::logic_error("lag band profile is empty");
  const auto it = std::max_element(mass.begin(), mass.end());
  return first_lag + static_cast<int>(it - mass.begin());
}

LagBandProfile lag_band_profile(const Matrix& map, std::size_t width) {
  if (map.rows != map.cols || map.rows == 0) {
    throw std::invalid_argument("lag_band_profile: map must be square and non-empty");
  }
  const int tau = static_cast<int>(map.rows);
  const int w = static_cast<int>(width);
  if (w < 1 || w > 2 * tau - 1) throw std::invalid_argument("lag_band_profile: bad band width");
  LagBandProfile profile;
  profile.first_lag = -(tau - 1);
  for (int lo = profile.first_lag; lo + w - 1 <= tau - 1; ++lo) {
    double sum = 0.0;
    int cells = 0;
    for (int i = 0; i < tau; ++i)
      for (int j = 0; j < tau; ++j)
        if (i - j >= lo && i - j < lo + w) {
          sum += map.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          ++cells;
        }
    profile.mass.push_back(sum / cells);
  }
  return profile;
}

}  // namespace master::explain
