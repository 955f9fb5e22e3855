// SPDX-License-Identifier: Apache-2.0
#include "selnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "selnet/errors.hpp"

namespace selnet {

GradCheckReport finite_diff_check(std::span<const ParamRef> params,
                                  const std::function<double()>& loss, double step_size) {
  if (!(step_size >= kMinFiniteDiffStep && step_size <= kMaxFiniteDiffStep)) {
    std::ostringstream msg;
    msg << "finite_diff_check: step size " << step_size << " outside [" << kMinFiniteDiffStep << ", "
        << kMaxFiniteDiffStep << "]";
    throw PreconditionError(msg.str());
  }
  auto evaluate = [&](const std::string& name, std::size_t index) {
    const double value = loss();
    if (!std::isfinite(value)) {
      throw NumericError("finite_diff_check: non-finite loss while perturbing " + name + "[" +
                         std::to_string(index) + "]");
    }
    return value;
  };

  GradCheckReport report;
  for (const auto& ref : params) {
    auto values = ref.param->value.values();
    const auto grads = ref.param->grad.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step_size;
      const double up = evaluate(ref.name, i);
      values[i] = saved - step_size;
      const double down = evaluate(ref.name, i);
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * step_size);
      const double err = std::abs(grads[i] - numeric) / std::max(1.0, std::abs(numeric));
      ++report.entries_checked;
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        if (err >= report.max_rel_error) {
          report.worst_param = ref.name;
          report.worst_index = i;
          report.worst_analytic = grads[i];
          report.worst_numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace selnet
