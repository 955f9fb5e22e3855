// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/classifier.hpp"

#include "selnet/loss.hpp"

namespace selnet::pipeline {

std::vector<double> SelectorNetClassifier::predict(const Matrix& x, const Matrix& embed) const {
  return net_.predict(x, embed).prob;
}

double SelectorNetClassifier::accumulate_gradients(const Matrix& x, const Matrix& embed,
                                                   std::span<const double> labels) {
  ForwardTape tape;
  const ForwardResult out = net_.forward(x, embed, true, &tape);
  net_.commit_statistics(tape);
  const double loss = bce_loss(out.prob, labels);
  const std::vector<double> dlogit = bce_logit_gradient(out.prob, labels);
  net_.backward(tape, dlogit);
  return loss;
}

std::unique_ptr<BinaryClassifier> SelectorNetClassifier::clone() const {
  return std::make_unique<SelectorNetClassifier>(net_);
}

LogisticClassifier::LogisticClassifier(std::size_t feature_dim, std::size_t embed_dim, std::uint64_t seed) {
  Rng rng(seed);
  linear_ = Linear(feature_dim + embed_dim, 1, rng);
}

Matrix LogisticClassifier::input(const Matrix& x, const Matrix& embed) const {
  return embed.cols() == 0 ? x : concat_cols(x, embed);
}

std::vector<double> LogisticClassifier::predict(const Matrix& x, const Matrix& embed) const {
  const Matrix logits = linear_.forward(input(x, embed));
  std::vector<double> p(logits.rows());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(logits(i, 0));
  return p;
}

double LogisticClassifier::accumulate_gradients(const Matrix& x, const Matrix& embed,
                                                std::span<const double> labels) {
  const Matrix in = input(x, embed);
  const Matrix logits = linear_.forward(in);
  std::vector<double> p(logits.rows());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(logits(i, 0));
  const double loss = bce_loss(p, labels);
  const std::vector<double> g = bce_logit_gradient(p, labels);
  linear_.backward(in, Matrix(g.size(), 1, g));
  return loss;
}

std::vector<ParamRef> LogisticClassifier::parameters() {
  std::vector<ParamRef> out;
  linear_.collect("linear", out);
  return out;
}

std::unique_ptr<BinaryClassifier> LogisticClassifier::clone() const {
  return std::make_unique<LogisticClassifier>(*this);
}

}  // namespace selnet::pipeline
