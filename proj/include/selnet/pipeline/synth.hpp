// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "selnet/pipeline/dataset.hpp"

namespace selnet::pipeline {

struct SynthConfig {
  std::size_t n = 2000;
  std::size_t informative = 5;
  std::size_t nuisance = 15;
  std::uint64_t seed = 42;
  /// Class-mean separation of each informative feature, in standard deviations.
  double shift = 0.8;
  /// inf_1 gains interaction * (2y - 1) * inf_0.
  double interaction = 0.5;
  std::size_t embed_dim = 10;
};

/// Balanced labels, informative features inf_*, label-independent nuisance features nui_*,
/// ids s00000.., stub embeddings. Parameters are recorded as comment lines.
Dataset synth_generate(const SynthConfig& config);

/// Names of the planted informative features.
std::vector<std::string> informative_names(const Dataset& data);

/// Deterministic pseudo-embedding of an identifier, entries in [0, 1).
std::vector<double> embed_stub(std::string_view id, std::size_t dim);

}  // namespace selnet::pipeline
