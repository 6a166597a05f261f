#include "synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/rng.hpp"

namespace hwml::cli {

std::string IntChoice::text() const {
  if (range) return fmt::format("{}..{}", lo, hi);
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

namespace {

Count parse_count(std::string_view text) {
  const double v = parse_double(text);
  if (v != static_cast<double>(static_cast<Count>(v))) throw ConfigError("expected an integer, got '" + std::string(text) + "'");
  return static_cast<Count>(v);
}

Count draw(const IntChoice& c, Rng& rng) {
  if (c.range) return rng.uniform_int(c.lo, c.hi);
  return c.values[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(c.values.size()) - 1))];
}

const std::vector<LayerKind>& all_kinds() {
  static const std::vector<LayerKind> kinds{LayerKind::Conv2D, LayerKind::FullyConnected, LayerKind::Pool2D};
  return kinds;
}

KindGenerator default_generator(LayerKind kind) {
  KindGenerator g;
  g.kind = kind;
  auto set = [&](const char* key, const char* value) { g.params[key] = parse_int_choice(value); };
  switch (kind) {
    case LayerKind::Conv2D:
      set("batch", "1..16");
      set("in_c", "3..128");
      set("in_hw", "8..64");
      set("kernel", "1,3,5,7");
      set("stride", "1..2");
      set("padding", "0..2");
      set("out_c", "8..128");
      g.runtime_ms = Expression::parse("0.05 + 1.2e-9*TotalFlops + 4e-8*TotalMemAccesses + 0.0005*batch*out_c");
      g.power_w = Expression::parse("55 + 0.3*batch + 0.04*out_c + 0.002*in_hw*kernel_hw + 1e-10*TotalFlops");
      break;
    case LayerKind::FullyConnected:
      set("batch", "1..64");
      set("in_units", "64..4096");
      set("out_units", "10..4096");
      g.runtime_ms = Expression::parse("0.01 + 1.5e-9*TotalFlops + 3e-8*TotalMemAccesses");
      g.power_w = Expression::parse("45 + 0.2*batch + 0.004*out_units + 1e-6*in_units*out_units");
      break;
    case LayerKind::Pool2D:
      set("batch", "1..32");
      set("in_c", "16..256");
      set("in_hw", "8..64");
      set("kernel", "2..3");
      set("stride", "1..2");
      g.runtime_ms = Expression::parse("0.005 + 5e-9*TotalFlops + 2e-8*TotalMemAccesses");
      g.power_w = Expression::parse("40 + 0.25*batch + 0.03*in_c + 0.01*kernel_hw*stride");
      break;
  }
  return g;
}

void check_generator(const KindGenerator& g) {
  for (const auto& p : generator_params(g.kind)) {
    const auto it = g.params.find(p);
    if (it == g.params.end()) throw ConfigError(fmt::format("[{}] is missing '{}'", to_string(g.kind), p));
    const IntChoice& c = it->second;
    const Count min = c.range ? c.lo : *std::min_element(c.values.begin(), c.values.end());
    const Count floor = p == "padding" ? 0 : 1;
    if (min < floor) throw ConfigError(fmt::format("[{}] '{}' must be at least {}", to_string(g.kind), p, floor));
  }
  std::set<std::string> allowed(feature_schema(g.kind).begin(), feature_schema(g.kind).end());
  allowed.insert("TotalFlops");
  allowed.insert("TotalMemAccesses");
  for (const Expression* e : {&g.runtime_ms, &g.power_w})
    for (const auto& v : e->variables())
      if (!allowed.count(v))
        throw ConfigError(fmt::format("[{}] expression uses unknown variable '{}'", to_string(g.kind), v));
}

LayerConfig draw_layer(const KindGenerator& g, Rng& rng, const std::string& name) {
  const auto& p = g.params;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    try {
      switch (g.kind) {
        case LayerKind::Conv2D: {
          const Count batch = draw(p.at("batch"), rng), in_c = draw(p.at("in_c"), rng), hw = draw(p.at("in_hw"), rng);
          const Count k = draw(p.at("kernel"), rng), s = draw(p.at("stride"), rng), pad = draw(p.at("padding"), rng);
          const Count out_c = draw(p.at("out_c"), rng);
          return make_conv(name, {batch, in_c, hw, hw}, {k, k, s, pad}, out_c);
        }
        case LayerKind::FullyConnected: {
          const Count batch = draw(p.at("batch"), rng), in = draw(p.at("in_units"), rng), out = draw(p.at("out_units"), rng);
          return make_fc(name, {batch, in, 1, 1}, out);
        }
        case LayerKind::Pool2D: {
          const Count batch = draw(p.at("batch"), rng), in_c = draw(p.at("in_c"), rng), hw = draw(p.at("in_hw"), rng);
          const Count k = draw(p.at("kernel"), rng), s = draw(p.at("stride"), rng);
          return make_pool(name, {batch, in_c, hw, hw}, {k, k, s, 0});
        }
      }
    } catch (const InvalidGeometry&) {
    }
  }
  throw ConfigError(fmt::format("[{}] ranges admit no valid layer geometry", to_string(g.kind)));
}

}  // namespace

IntChoice parse_int_choice(std::string_view text) {
  const std::string t = trim(text);
  IntChoice c;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    c.range = true;
    c.lo = parse_count(trim(std::string_view(t).substr(0, dots)));
    c.hi = parse_count(trim(std::string_view(t).substr(dots + 2)));
    if (c.lo > c.hi) throw ConfigError("empty range '" + t + "'");
    return c;
  }
  c.range = false;
  std::size_t s = 0;
  while (true) {
    const auto comma = t.find(',', s);
    c.values.push_back(parse_count(trim(std::string_view(t).substr(s, comma == std::string::npos ? std::string::npos : comma - s))));
    if (comma == std::string::npos) break;
    s = comma + 1;
  }
  return c;
}

const std::vector<std::string>& generator_params(LayerKind kind) {
  static const std::vector<std::string> conv{"batch", "in_c", "in_hw", "kernel", "stride", "padding", "out_c"};
  static const std::vector<std::string> fc{"batch", "in_units", "out_units"};
  static const std::vector<std::string> pool{"batch", "in_c", "in_hw", "kernel", "stride"};
  switch (kind) {
    case LayerKind::Conv2D: return conv;
    case LayerKind::FullyConnected: return fc;
    case LayerKind::Pool2D: return pool;
  }
  return conv;
}

SynthConfig default_synth_config() {
  SynthConfig c;
  for (LayerKind k : all_kinds()) c.kinds.push_back(default_generator(k));
  return c;
}

SynthConfig parse_synth_config(std::string_view text) {
  SynthConfig config;
  config.kinds.clear();
  std::map<std::string, std::string> globals;
  std::vector<std::pair<LayerKind, std::map<std::string, std::pair<std::string, std::size_t>>>> sections;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      LayerKind kind;
      try {
        kind = parse_layer_kind(trim(std::string_view(line).substr(1, line.size() - 2)));
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
      for (const auto& s : sections)
        if (s.first == kind) throw ParseError(line_no, "duplicate section");
      sections.push_back({kind, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(line_no, "expected key = value");
    if (sections.empty()) {
      if (key != "samples" && key != "noise") throw ParseError(line_no, "unknown key '" + key + "'");
      if (!globals.emplace(key, value).second) throw ParseError(line_no, "duplicate key '" + key + "'");
      try {
        if (key == "samples") {
          const Count n = parse_count(value);
          if (n < 1) throw ConfigError("samples must be positive");
          config.samples = static_cast<std::size_t>(n);
        } else {
          config.noise = parse_double(value);
          if (!(config.noise >= 0.0)) throw ConfigError("noise must be non-negative");
        }
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
      continue;
    }
    auto& entries = sections.back().second;
    if (!entries.emplace(key, std::make_pair(value, line_no)).second)
      throw ParseError(line_no, "duplicate key '" + key + "'");
  }
  if (sections.empty())
    for (LayerKind k : all_kinds()) sections.push_back({k, {}});

  for (const auto& [kind, entries] : sections) {
    KindGenerator g = default_generator(kind);
    const auto& names = generator_params(kind);
    for (const auto& [key, vl] : entries) {
      try {
        if (key == "runtime_ms") g.runtime_ms = Expression::parse(vl.first);
        else if (key == "power_w") g.power_w = Expression::parse(vl.first);
        else if (std::find(names.begin(), names.end(), key) != names.end()) g.params[key] = parse_int_choice(vl.first);
        else throw ConfigError("unknown key '" + key + "'");
      } catch (const ConfigError& e) {
        throw ParseError(vl.second, e.what());
      }
    }
    check_generator(g);
    config.kinds.push_back(std::move(g));
  }
  return config;
}

std::string format_synth_config(const SynthConfig& config) {
  std::string out = fmt::format("samples = {}\nnoise = {}\n", config.samples, config.noise);
  for (const auto& g : config.kinds) {
    out += fmt::format("[{}]\n", to_string(g.kind));
    for (const auto& p : generator_params(g.kind)) out += fmt::format("{} = {}\n", p, g.params.at(p).text());
    out += fmt::format("runtime_ms = {}\npower_w = {}\n", g.runtime_ms.text(), g.power_w.text());
  }
  return out;
}

double ground_truth(const Expression& expr, const LayerConfig& layer) {
  std::map<std::string, double> vars;
  const FeatureVector f = build_features(layer);
  for (std::size_t i = 0; i < f.schema.size(); ++i) vars[f.schema[i]] = f.values[i];
  const auto s = special_terms(layer);
  vars["TotalFlops"] = s[0];
  vars["TotalMemAccesses"] = s[1];
  return expr.evaluate(vars);
}

std::vector<ProfileRow> synthesize(const SynthConfig& config, std::uint64_t seed) {
  std::vector<ProfileRow> rows;
  for (const auto& g : config.kinds) {
    check_generator(g);
    const std::string kind(to_string(g.kind));
    Rng layers(derive_seed(seed, "synth-layers-" + kind));
    Rng noise(derive_seed(seed, "synth-noise-" + kind));
    for (std::size_t i = 0; i < config.samples; ++i) {
      ProfileRow r;
      r.layer = draw_layer(g, layers, kind + std::to_string(i));
      const double t = ground_truth(g.runtime_ms, r.layer);
      const double p = ground_truth(g.power_w, r.layer);
      if (!(t > 0.0) || !(p > 0.0))
        throw ConfigError(fmt::format("[{}] ground truth is not positive on a sampled layer", kind));
      const double nt = noise.normal(), np = noise.normal();
      r.runtime_ms = t * (1.0 + config.noise * nt);
      r.power_w = p * (1.0 + config.noise * np);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string synthesize_profile_csv(const SynthConfig& config, std::uint64_t seed) {
  std::string out = fmt::format("# synthetic profile, seed {}\n", seed);
  std::istringstream echo(format_synth_config(config));
  for (std::string line; std::getline(echo, line);) out += "# " + line + "\n";
  out += std::string(kProfileHeader) + "\n";
  for (const auto& r : synthesize(config, seed)) out += format_profile_row(r) + "\n";
  return out;
}

}  // namespace hwml::cli
