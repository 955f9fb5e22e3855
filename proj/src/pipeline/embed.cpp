// SPDX-License-Identifier: Apache-2.0
#include <cstdint>

#include "selnet/pipeline/synth.hpp"
#include "selnet/rng.hpp"

namespace selnet::pipeline {

std::vector<double> embed_stub(std::string_view id, std::size_t dim) {
  std::vector<double> out(dim);
  std::uint64_t state = fnv1a64(id);
  for (auto& v : out) {
    state = splitmix64(state);
    v = static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  return out;
}

}  // namespace selnet::pipeline
