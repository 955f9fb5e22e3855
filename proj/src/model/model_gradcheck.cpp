// SPDX-License-Identifier: Apache-2.0
#include "selnet/model_gradcheck.hpp"

#include "selnet/loss.hpp"

namespace selnet {

GradCheckReport finite_diff_check(SelectorNet& model, const Matrix& x, const Matrix& embed,
                                  std::span<const double> labels, double step_size, bool training) {
  model.zero_grad();
  ForwardTape tape;
  const ForwardResult result = model.forward(x, embed, training, &tape);
  model.backward(tape, bce_logit_gradient(result.prob, labels));

  const auto params = model.parameters();
  auto loss = [&] { return bce_loss(model.forward(x, embed, training).prob, labels); };
  return finite_diff_check(params, loss, step_size);
}

}  // namespace selnet
