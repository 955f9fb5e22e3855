// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/synth.hpp"

#include <cstdio>
#include <numeric>

#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"
#include "selnet/rng.hpp"

namespace selnet::pipeline {

Dataset synth_generate(const SynthConfig& config) {
  if (config.n < 100) throw PreconditionError("synth: n must be >= 100");
  if (config.informative + config.nuisance == 0) throw PreconditionError("synth: need at least one feature");
  Rng rng(config.seed);

  std::vector<std::string> names;
  for (std::size_t j = 0; j < config.informative; ++j) names.push_back("inf_" + std::to_string(j));
  for (std::size_t j = 0; j < config.nuisance; ++j) names.push_back("nui_" + std::to_string(j));

  Dataset data;
  data.schema = FeatureSchema(names);
  const std::size_t n = config.n;
  data.labels.assign(n, 0.0);
  for (std::size_t i = 0; i < n / 2; ++i) data.labels[i] = 1.0;
  rng.shuffle(std::span<double>(data.labels));

  data.features = Matrix(n, names.size());
  data.embeddings = Matrix(n, config.embed_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = 2.0 * data.labels[i] - 1.0;
    for (std::size_t j = 0; j < config.informative; ++j) {
      data.features(i, j) = rng.normal() + 0.5 * config.shift * sign;
    }
    if (config.informative >= 2) data.features(i, 1) += config.interaction * sign * data.features(i, 0);
    for (std::size_t j = 0; j < config.nuisance; ++j) data.features(i, config.informative + j) = rng.normal();

    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", i);
    data.ids.emplace_back(id);
    const std::vector<double> e = embed_stub(id, config.embed_dim);
    for (std::size_t k = 0; k < e.size(); ++k) data.embeddings(i, k) = e[k];
  }

  data.comments = {
      "synth n=" + std::to_string(config.n),
      "synth informative=" + std::to_string(config.informative),
      "synth nuisance=" + std::to_string(config.nuisance),
      "synth seed=" + std::to_string(config.seed),
      "synth shift=" + format_double(config.shift),
      "synth interaction=" + format_double(config.interaction),
      "synth embed_dim=" + std::to_string(config.embed_dim),
  };
  return data;
}

std::vector<std::string> informative_names(const Dataset& data) {
  std::vector<std::string> out;
  for (const auto& name : data.schema.names()) {
    if (name.rfind("inf_", 0) == 0) out.push_back(name);
  }
  return out;
}

}  // namespace selnet::pipeline
