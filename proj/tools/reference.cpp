#include "reference.hpp"

namespace hwml::cli {

const std::vector<NetworkRuntimeRow>& network_runtime_table() {
  static const std::vector<NetworkRuntimeRow> rows{
      {"VGG-16", 345.83, 373.82, 368.42},
      {"AlexNet", 33.16, 43.41, 39.02},
      {"NIN", 45.68, 62.62, 50.66},
      {"Overfeat", 114.71, 195.21, 197.99},
      {"CIFAR10-6conv", 28.75, 51.13, 50.09},
  };
  return rows;
}

const std::vector<LayerModelRow>& layer_model_table() {
  static const std::vector<LayerModelRow> rows{
      {"CONV", "60", "39.97%", "1.019", "58.29%", "4.304"},
      {"FC", "17", "41.92%", "0.7474", "73.76%", "0.8265"},
      {"Pool", "31", "11.41%", "0.0686", "79.91%", "1.763"},
  };
  return rows;
}

double relative_error_percent(double predicted, double actual) noexcept {
  return 100.0 * (predicted - actual) / actual;
}

}  // namespace hwml::cli
