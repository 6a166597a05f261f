#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hwml {

using Count = std::int64_t;

struct TensorShape {
  Count batch = 1;
  Count channels = 1;
  Count height = 1;
  Count width = 1;

  Count elements() const noexcept { return batch * channels * height * width; }
  // Per-sample feature count after flattening (what an FC layer consumes).
  Count flat_features() const noexcept { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

std::string to_string(const TensorShape& shape);

enum class LayerKind { Conv2D, FullyConnected, Pool2D };

std::string_view to_string(LayerKind kind) noexcept;
// Accepts the short CLI spellings (conv, fc, pool) and the enum names,
// case-insensitively. Throws ConfigError on anything else.
LayerKind parse_layer_kind(std::string_view text);

struct Window {
  Count kernel_h = 1;
  Count kernel_w = 1;
  Count stride = 1;
  Count padding = 0;
  bool operator==(const Window&) const = default;
};

struct Conv2D {
  Window window;
  Count output_channels = 1;
  bool operator==(const Conv2D&) const = default;
};

struct Pool2D {
  Window window;
  bool operator==(const Pool2D&) const = default;
};

struct FullyConnected {
  Count output_units = 1;
  bool operator==(const FullyConnected&) const = default;
};

using LayerOp = std::variant<Conv2D, FullyConnected, Pool2D>;

struct LayerConfig {
  std::string name;
  TensorShape input;
  LayerOp op;

  LayerKind kind() const noexcept;
  // Null for FullyConnected layers.
  const Window* window() const noexcept;
  bool operator==(const LayerConfig&) const = default;
};

// Builders validate the geometry and throw InvalidGeometry on violation.
LayerConfig make_conv(std::string name, TensorShape input, Window window, Count output_channels);
LayerConfig make_pool(std::string name, TensorShape input, Window window);
LayerConfig make_fc(std::string name, TensorShape input, Count output_units);

void validate(const LayerConfig& layer);

// floor((in + 2p - k) / s) + 1, or throws InvalidGeometry when < 1.
Count conv_output_extent(Count in, Count kernel, Count stride, Count padding);

TensorShape infer_output_shape(const LayerConfig& layer);

struct OpCounts {
  Count flops = 0;
  Count macs = 0;
  Count params = 0;
  Count input_reads = 0;
  Count weight_reads = 0;
  Count output_writes = 0;

  Count memory_accesses() const noexcept { return input_reads + weight_reads + output_writes; }
  bool operator==(const OpCounts&) const = default;
};

// One MAC is two FLOPs. Pooling does kh*kw comparisons per output element
// and no MACs. Bias terms are not counted.
OpCounts count_ops(const LayerConfig& layer);

struct NetworkConfig {
  std::string name;
  std::vector<LayerConfig> layers;

  bool empty() const noexcept { return layers.empty(); }
};

// Checks that each layer consumes the previous layer's output. FC layers
// compare batch and flattened feature count.
void validate_chain(const NetworkConfig& net);

// Line-oriented network description, one layer per line:
//   name kind key=value ...
// with keys in=NxCxHxW, k=KhxKw (or k=K), s=N, p=N, out=N. '#' starts a
// comment. Only the first layer needs in=; later layers inherit the
// inferred shape, and an explicit in= on them must agree with it.
NetworkConfig parse_network(std::string_view text, std::string name = "network");

}  // namespace hwml
