// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/kfold.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "selnet/errors.hpp"
#include "selnet/rng.hpp"

namespace selnet::pipeline {

FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("kfold_split: need at least 2 folds, got " + std::to_string(k));
  if (n < k) {
    throw PreconditionError("kfold_split: " + std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  FoldSplit folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<long>(pos), order.begin() + static_cast<long>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

std::vector<std::size_t> training_rows(const FoldSplit& split, std::size_t test) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < split.size(); ++f) {
    if (f != test) out.insert(out.end(), split[f].begin(), split[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace selnet::pipeline
