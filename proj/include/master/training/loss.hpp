#pragma once

#include <span>

#include "master/numerics/tensor.hpp"

namespace master::train {

// Sum over stocks of squared error (not the mean).
nn::Tensor mse_loss(const nn::Tensor& prediction, std::span<const double> labels);

}  // namespace master::train
