#include "hwml/netgraph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include "hwml/error.hpp"

namespace hwml {

std::string to_string(const TensorShape& s) {
  return std::to_string(s.batch) + "x" + std::to_string(s.channels) + "x" + std::to_string(s.height) +
         "x" + std::to_string(s.width);
}

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv2D: return "conv";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::Pool2D: return "pool";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "conv" || lower == "conv2d") return LayerKind::Conv2D;
  if (lower == "fc" || lower == "fullyconnected") return LayerKind::FullyConnected;
  if (lower == "pool" || lower == "pool2d") return LayerKind::Pool2D;
  throw ConfigError("unknown layer kind '" + std::string(text) + "'");
}

LayerKind LayerConfig::kind() const noexcept {
  switch (op.index()) {
    case 0: return LayerKind::Conv2D;
    case 1: return LayerKind::FullyConnected;
    default: return LayerKind::Pool2D;
  }
}

const Window* LayerConfig::window() const noexcept {
  if (const auto* conv = std::get_if<Conv2D>(&op)) return &conv->window;
  if (const auto* pool = std::get_if<Pool2D>(&op)) return &pool->window;
  return nullptr;
}

Count conv_output_extent(Count in, Count kernel, Count stride, Count padding) {
  if (in < 1 || kernel < 1 || stride < 1 || padding < 0)
    throw InvalidGeometry("window parameters out of range");
  const Count span = in + 2 * padding - kernel;
  if (span < 0)
    throw InvalidGeometry("kernel " + std::to_string(kernel) + " exceeds padded extent " +
                          std::to_string(in + 2 * padding));
  return span / stride + 1;
}

namespace {

void validate_shape(const TensorShape& s) {
  if (s.batch < 1 || s.channels < 1 || s.height < 1 || s.width < 1)
    throw InvalidGeometry("tensor shape " + to_string(s) + " has a non-positive extent");
}

void validate_window(const TensorShape& in, const Window& w) {
  conv_output_extent(in.height, w.kernel_h, w.stride, w.padding);
  conv_output_extent(in.width, w.kernel_w, w.stride, w.padding);
}

}  // namespace

void validate(const LayerConfig& layer) {
  validate_shape(layer.input);
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Conv2D>) {
          if (op.output_channels < 1) throw InvalidGeometry("output channels must be positive");
          validate_window(layer.input, op.window);
        } else if constexpr (std::is_same_v<T, Pool2D>) {
          validate_window(layer.input, op.window);
        } else {
          if (op.output_units < 1) throw InvalidGeometry("output units must be positive");
        }
      },
      layer.op);
}

LayerConfig make_conv(std::string name, TensorShape input, Window window, Count output_channels) {
  LayerConfig layer{std::move(name), input, Conv2D{window, output_channels}};
  validate(layer);
  return layer;
}

LayerConfig make_pool(std::string name, TensorShape input, Window window) {
  LayerConfig layer{std::move(name), input, Pool2D{window}};
  validate(layer);
  return layer;
}

LayerConfig make_fc(std::string name, TensorShape input, Count output_units) {
  LayerConfig layer{std::move(name), input, FullyConnected{output_units}};
  validate(layer);
  return layer;
}

TensorShape infer_output_shape(const LayerConfig& layer) {
  const TensorShape& in = layer.input;
  if (const auto* fc = std::get_if<FullyConnected>(&layer.op)) {
    return {in.batch, fc->output_units, 1, 1};
  }
  const Window& w = *layer.window();
  TensorShape out = in;
  out.height = conv_output_extent(in.height, w.kernel_h, w.stride, w.padding);
  out.width = conv_output_extent(in.width, w.kernel_w, w.stride, w.padding);
  if (const auto* conv = std::get_if<Conv2D>(&layer.op)) out.channels = conv->output_channels;
  return out;
}

OpCounts count_ops(const LayerConfig& layer) {
  const TensorShape in = layer.input;
  const TensorShape out = infer_output_shape(layer);
  OpCounts counts;
  counts.input_reads = in.elements();
  counts.output_writes = out.elements();

  if (const auto* conv = std::get_if<Conv2D>(&layer.op)) {
    const Window& w = conv->window;
    counts.params = w.kernel_h * w.kernel_w * in.channels * conv->output_channels;
    counts.macs = in.batch * out.height * out.width * out.channels * w.kernel_h * w.kernel_w * in.channels;
    counts.flops = 2 * counts.macs;
  } else if (const auto* fc = std::get_if<FullyConnected>(&layer.op)) {
    counts.params = in.flat_features() * fc->output_units;
    counts.macs = in.batch * in.flat_features() * fc->output_units;
    counts.flops = 2 * counts.macs;
  } else {
    const Window& w = std::get<Pool2D>(layer.op).window;
    counts.flops = out.elements() * w.kernel_h * w.kernel_w;
  }
  counts.weight_reads = counts.params;
  return counts;
}

void validate_chain(const NetworkConfig& net) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerConfig& layer = net.layers[i];
    if (!names.insert(layer.name).second) throw ShapeMismatch(layer.name, "duplicate layer name");
    validate(layer);
    if (i == 0) continue;
    const TensorShape expected = infer_output_shape(net.layers[i - 1]);
    const bool ok = layer.kind() == LayerKind::FullyConnected
                        ? expected.batch == layer.input.batch &&
                              expected.flat_features() == layer.input.flat_features()
                        : expected == layer.input;
    if (!ok)
      throw ShapeMismatch(layer.name, "input " + to_string(layer.input) +
                                          " does not match previous output " + to_string(expected));
  }
}

namespace {

Count parse_count(std::string_view text, std::size_t line, std::string_view key) {
  Count value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(line, "invalid integer '" + std::string(text) + "' for key '" + std::string(key) + "'");
  return value;
}

std::vector<Count> parse_dims(std::string_view text, std::size_t line, std::string_view key) {
  std::vector<Count> dims;
  std::size_t start = 0;
  while (true) {
    const std::size_t x = text.find('x', start);
    dims.push_back(parse_count(text.substr(start, x - start), line, key));
    if (x == std::string_view::npos) break;
    start = x + 1;
  }
  return dims;
}

struct LayerLine {
  std::string name;
  LayerKind kind;
  std::optional<TensorShape> in;
  std::optional<std::pair<Count, Count>> kernel;
  std::optional<Count> stride;
  std::optional<Count> padding;
  std::optional<Count> out;
};

LayerLine parse_layer_line(const std::string& content, std::size_t line) {
  std::istringstream tokens(content);
  std::string name, kind_text, token;
  tokens >> name >> kind_text;
  if (kind_text.empty()) throw ParseError(line, "expected 'name kind key=value ...'");

  LayerLine out;
  out.name = name;
  try {
    out.kind = parse_layer_kind(kind_text);
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }

  std::set<std::string> seen;
  while (tokens >> token) {
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
      throw ParseError(line, "expected key=value, got '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string_view value = std::string_view(token).substr(eq + 1);
    if (!seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");

    if (key == "in") {
      const auto dims = parse_dims(value, line, key);
      if (dims.size() != 4) throw ParseError(line, "in= expects NxCxHxW");
      out.in = TensorShape{dims[0], dims[1], dims[2], dims[3]};
    } else if (key == "k") {
      const auto dims = parse_dims(value, line, key);
      if (dims.size() == 1) out.kernel = {dims[0], dims[0]};
      else if (dims.size() == 2) out.kernel = {dims[0], dims[1]};
      else throw ParseError(line, "k= expects K or KhxKw");
    } else if (key == "s") {
      out.stride = parse_count(value, line, key);
    } else if (key == "p") {
      out.padding = parse_count(value, line, key);
    } else if (key == "out") {
      out.out = parse_count(value, line, key);
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }

  if (out.kind == LayerKind::FullyConnected && (out.kernel || out.stride || out.padding))
    throw ParseError(line, "fc layers take no k/s/p keys");
  if (out.kind != LayerKind::Pool2D && !out.out) throw ParseError(line, "missing out=");
  if (out.kind == LayerKind::Pool2D && out.out) throw ParseError(line, "pool layers take no out= key");
  if (out.kind != LayerKind::FullyConnected && !out.kernel) throw ParseError(line, "missing k=");
  return out;
}

}  // namespace

NetworkConfig parse_network(std::string_view text, std::string name) {
  NetworkConfig net;
  net.name = std::move(name);
  std::set<std::string> names;
  std::optional<TensorShape> next_input;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    LayerLine spec = parse_layer_line(line, line_no);
    if (!names.insert(spec.name).second) throw ParseError(line_no, "duplicate layer name '" + spec.name + "'");

    TensorShape input;
    if (spec.in) {
      input = *spec.in;
      if (next_input) {
        const bool ok = spec.kind == LayerKind::FullyConnected
                            ? input.batch == next_input->batch &&
                                  input.flat_features() == next_input->flat_features()
                            : input == *next_input;
        if (!ok)
          throw ShapeMismatch(spec.name, "declared input " + to_string(input) +
                                             " does not match previous output " + to_string(*next_input));
      }
    } else if (next_input) {
      input = *next_input;
    } else {
      throw ParseError(line_no, "first layer must declare in=");
    }

    Window window;
    if (spec.kernel) {
      window.kernel_h = spec.kernel->first;
      window.kernel_w = spec.kernel->second;
    }
    window.stride = spec.stride.value_or(1);
    window.padding = spec.padding.value_or(0);

    LayerConfig layer;
    try {
      switch (spec.kind) {
        case LayerKind::Conv2D: layer = make_conv(spec.name, input, window, *spec.out); break;
        case LayerKind::Pool2D: layer = make_pool(spec.name, input, window); break;
        case LayerKind::FullyConnected: layer = make_fc(spec.name, input, *spec.out); break;
      }
    } catch (const InvalidGeometry& e) {
      throw InvalidGeometry("line " + std::to_string(line_no) + ": layer '" + spec.name + "': " + e.what());
    }
    next_input = infer_output_shape(layer);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace hwml
