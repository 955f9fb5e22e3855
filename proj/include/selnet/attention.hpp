// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "selnet/matrix.hpp"
#include "selnet/selectornet.hpp"

namespace selnet {

/// Per-sample, per-feature attention derived from step traces.
///
/// For each step: selection = S1 + S2, contribution = row sum of x_dec, and
/// the step attention is selection scaled by contribution. The overall
/// attention is the plain sum of the step attentions.
struct AttentionReport {
  std::vector<Matrix> per_step;  // each B x F
  Matrix overall;                // B x F
  std::vector<std::string> feature_names;
};

/// Throws PreconditionError on an empty trace list, ShapeError on
/// inconsistent trace shapes.
AttentionReport attention(std::span<const StepTrace> traces,
                          std::vector<std::string> feature_names = {});

/// Mean of |overall attention| per feature over all samples.
std::vector<double> mean_abs_attention(const AttentionReport& report);

/// CSV with a header of feature names and one row per sample.
void write_attention_csv(const AttentionReport& report, const std::filesystem::path& path);

}  // namespace selnet
