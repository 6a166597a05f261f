#pragma once

#include <string_view>
#include <vector>

namespace hwml::cli {

// Published whole-network runtimes (ms) on the same GPU.
struct NetworkRuntimeRow {
  std::string_view network;
  double paleo_ms;
  double neuralpower_ms;
  double actual_ms;
};

// Published per-layer-kind runtime model accuracy. Kept as the printed
// strings so the echo is exact.
struct LayerModelRow {
  std::string_view layer;
  std::string_view model_size;
  std::string_view np_rmspe;
  std::string_view np_rmse_ms;
  std::string_view paleo_rmspe;
  std::string_view paleo_rmse_ms;
};

const std::vector<NetworkRuntimeRow>& network_runtime_table();
const std::vector<LayerModelRow>& layer_model_table();

// 100 (predicted - actual) / actual
double relative_error_percent(double predicted, double actual) noexcept;

}  // namespace hwml::cli
