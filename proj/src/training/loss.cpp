#include "master/training/loss.hpp"

#include <string>

#include "master/numerics/ops.hpp"

namespace master::train {

nn::Tensor mse_loss(const nn::Tensor& prediction, std::span<const double> labels) {
  if (prediction.rank() != 1 || prediction.size() != labels.size()) {
    throw nn::ShapeError("mse_loss: prediction shape " + nn::to_string(prediction.shape()) +
                         " vs " + std::to_string(labels.size()) + " labels");
  }
  nn::Tensor target({labels.size()}, std::vector<double>(labels.begin(), labels.end()));
  return nn::sum(nn::square(nn::sub(prediction, target)));
}

}  // namespace master::train
