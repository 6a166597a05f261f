#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hwml/bayesopt.hpp"

namespace hwml {

// sum_i ((x_i - c_i) / s_i)^2, plus optional N(0, noise^2) keyed by the
// evaluation index so repeated runs see the same noise.
struct QuadraticObjective {
  std::vector<double> center;
  std::vector<double> scale;  // empty means all ones
  double noise_stddev = 0.0;
  std::uint64_t seed = 0;

  double value(std::span<const double> x) const;
  Objective bind() const;
};

// Branin function on the unit square, rescaled to x1 in [-5, 10] and
// x2 in [0, 15]. Global minimum 0.397887.
double branin_unit(std::span<const double> u);

// Runs `/bin/sh -c command`, writes the point as one CSV line to its
// stdin and reads a single number from its stdout. A non-zero exit status
// or unparsable output counts as a failed evaluation.
struct CommandObjective {
  std::string command;

  std::optional<double> value(std::span<const double> x) const;
  Objective bind() const;
};

}  // namespace hwml
