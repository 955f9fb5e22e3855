// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace selnet::pipeline {

using FoldSplit = std::vector<std::vector<std::size_t>>;

/// Seeded shuffle of 0..n-1 dealt into k folds; the first n % k folds get one extra row.
/// Each fold is sorted ascending. PreconditionError when n < k or k < 2.
FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Every index not in fold `test`, ascending.
std::vector<std::size_t> training_rows(const FoldSplit& split, std::size_t test);

}  // namespace selnet::pipeline
