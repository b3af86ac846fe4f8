#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "master/explain/heatmap.hpp"
#include "master/numerics/tensor.hpp"

namespace master::explain {

// Mean over heads by default; or one intra head and one inter head.
struct HeadSelection {
  std::optional<std::size_t> intra_head;
  std::optional<std::size_t> inter_head;

  std::string label() const;
};

struct CrossTimeMap {
  std::size_t target = 0;  // u
  std::size_t source = 0;  // v
  Matrix map;              // tau x tau: target time rows, source time columns
  std::string head_mode;
};

// I[i, j] = S1_v[i, j] * S2_i[u, v] after head aggregation.
// intra: [M, N1, tau, tau], inter: [tau, N2, M, M].
CrossTimeMap cross_time_map(const nn::Tensor& intra, const nn::Tensor& inter, std::size_t target,
                            std::size_t source, const HeadSelection& heads = {});

// Momentary inter-stock map at step t after head aggregation, M x M.
Matrix inter_stock_map(const nn::Tensor& inter, std::size_t step, const HeadSelection& heads = {});

// Average value per cell over bands of three consecutive lags i - j.
// Entry b covers lags first_lag + b .. first_lag + b + 2, where
// first_lag = -(tau - 1).
struct LagBandProfile {
  int first_lag = 0;
  std::vector<double> mass;

  // Lower lag of the band with the largest mass.
  int peak_lag() const;
  double mass_at(int lag) const { return mass.at(static_cast<std::size_t>(lag - first_lag)); }
};

LagBandProfile lag_band_profile(const Matrix& map, std::size_t width = 3);

}  // namespace master::explain
