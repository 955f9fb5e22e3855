// SPDX-License-Identifier: Apache-2.0
#include "selnet/selectornet.hpp"

#include "selnet/errors.hpp"

namespace selnet {

void SelectorNetConfig::validate() const {
  if (feature_dim == 0) throw PreconditionError("SelectorNet config: feature_dim must be >= 1");
  if (steps == 0) throw PreconditionError("SelectorNet config: steps must be >= 1");
}

SelectorNet::SelectorNet(const SelectorNetConfig& config) : config_(config) {
  config_.validate();
  const std::size_t f = config_.feature_dim;
  Rng rng(config_.seed);
  steps_.reserve(config_.steps);
  for (std::size_t s = 0; s < config_.steps; ++s) {
    StepBlocks blocks;
    blocks.xstep_block = ResBlock(f, config_.resblock_variant, rng);
    blocks.selector = SelectorBlock(f, config_.selector_variant, rng);
    blocks.post_block = ResBlock(f, config_.resblock_variant, rng);
    blocks.fab = FusionAttentionBlock(f, config_.fab_variant, rng);
    blocks.decision1 = ResBlock(f, config_.resblock_variant, rng);
    blocks.decision2 = ResBlock(f, config_.resblock_variant, rng);
    // Every row of x_step is the same vector, so batch norms on the x_step path
    // reduce to their beta in training. They keep batch statistics at inference
    // so both modes agree, and S2 starts as all ones.
    if (config_.resblock_variant == ResBlockVariant::Residual) {
      blocks.xstep_block.norm.batch_stats_at_inference = true;
      blocks.xstep_block.norm.beta.value.fill(1.0);
    }
    blocks.fab.norm_step.batch_stats_at_inference = true;
    steps_.push_back(std::move(blocks));
  }
  head_ = Linear(f + config_.embed_dim, 1, rng);
}

ForwardResult SelectorNet::forward(const Matrix& x, const Matrix& embed, bool training,
                                   ForwardTape* tape) const {
  const std::size_t f = config_.feature_dim;
  const std::size_t b = x.rows();
  if (x.cols() != f) {
    throw ShapeError("SelectorNet: input width " + std::to_string(x.cols()) +
                     " does not match configured feature_dim " + std::to_string(f));
  }
  if (embed.cols() != config_.embed_dim || embed.rows() != b) {
    throw ShapeError("SelectorNet: embedding " + embed.shape_string() + " does not match batch " +
                     std::to_string(b) + " x embed_dim " + std::to_string(config_.embed_dim));
  }
  if (b == 0) throw PreconditionError("SelectorNet: empty batch");

  ForwardTape local;
  ForwardTape& t = tape != nullptr ? *tape : local;
  t.steps.assign(config_.steps, StepTape{});
  t.batch = b;
  t.training = training;
  t.recorded = false;

  const bool need_processed_step =
      config_.fab_step_input == FabStepInput::Processed || steps_.front().selector.uses_s2();

  ForwardResult result;
  result.traces.reserve(config_.steps);
  Matrix x_step = Matrix::ones(b, f);
  Matrix decision(b, f);
  for (std::size_t s = 0; s < config_.steps; ++s) {
    const StepBlocks& blocks = steps_[s];
    StepTape& st = t.steps[s];
    st.x_step_in = x_step;

    Matrix s2(b, f);
    st.xstep_computed = need_processed_step;
    if (need_processed_step) s2 = blocks.xstep_block.forward(x_step, training, st.xstep);

    Matrix selected = blocks.selector.forward(x, s2, st.selector);
    Matrix processed = blocks.post_block.forward(selected, training, st.post);
    const Matrix& fab_step = config_.fab_step_input == FabStepInput::Processed ? s2 : x_step;
    auto fused = blocks.fab.forward(processed, fab_step, training, st.fab);
    Matrix x_dec = blocks.decision2.forward(blocks.decision1.forward(fused.dec, training, st.decision1),
                                            training, st.decision2);
    decision += x_dec;

    StepTrace trace;
    trace.s1 = st.selector.s1;
    trace.s2 = std::move(s2);
    trace.x_step_in = std::move(x_step);
    trace.x_step_out = fused.step;
    trace.x_dec = std::move(x_dec);
    result.traces.push_back(std::move(trace));
    x_step = std::move(fused.step);
  }

  t.head_input = concat_cols(decision, embed);
  Matrix logits = head_.forward(t.head_input);
  result.logit.assign(logits.values().begin(), logits.values().end());
  result.prob.resize(b);
  for (std::size_t i = 0; i < b; ++i) result.prob[i] = sigmoid(result.logit[i]);
  t.recorded = true;
  return result;
}

void SelectorNet::commit_statistics(const ForwardTape& tape) {
  if (!tape.recorded || !tape.training) {
    throw StateError("SelectorNet: commit_statistics needs a recorded training-mode forward");
  }
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    StepBlocks& blocks = steps_[s];
    const StepTape& st = tape.steps[s];
    if (st.xstep_computed) blocks.xstep_block.commit(st.xstep);
    blocks.post_block.commit(st.post);
    blocks.fab.commit(st.fab);
    blocks.decision1.commit(st.decision1);
    blocks.decision2.commit(st.decision2);
  }
}

void SelectorNet::backward(const ForwardTape& tape, std::span<const double> dlogit) {
  if (!tape.recorded) throw StateError("SelectorNet: backward without a recorded forward pass");
  if (tape.steps.size() != steps_.size()) {
    throw StateError("SelectorNet: tape was recorded by a model with a different step count");
  }
  if (dlogit.size() != tape.batch) {
    throw ShapeError("SelectorNet backward: " + std::to_string(dlogit.size()) +
                     " logit gradients for a batch of " + std::to_string(tape.batch));
  }
  const std::size_t b = tape.batch;
  const std::size_t f = config_.feature_dim;

  Matrix d_logit(b, 1, std::vector<double>(dlogit.begin(), dlogit.end()));
  Matrix d_head_in = head_.backward(tape.head_input, d_logit);
  const Matrix d_decision = split_cols(d_head_in, f).first;

  Matrix d_step_carry(b, f);  // gradient w.r.t. the x_step leaving the current step
  for (std::size_t s = steps_.size(); s-- > 0;) {
    StepBlocks& blocks = steps_[s];
    const StepTape& st = tape.steps[s];

    Matrix d_fab_dec = blocks.decision1.backward(st.decision1, blocks.decision2.backward(st.decision2, d_decision));
    auto d_fab = blocks.fab.backward(st.fab, d_fab_dec, d_step_carry);
    Matrix d_selected = blocks.post_block.backward(st.post, d_fab.dx);
    auto d_sel = blocks.selector.backward(st.selector, d_selected);

    Matrix d_s2 = std::move(d_sel.ds2);
    Matrix d_step_in(b, f);
    if (config_.fab_step_input == FabStepInput::Processed) {
      d_s2 += d_fab.dx_step;
    } else {
      d_step_in = std::move(d_fab.dx_step);
    }
    if (st.xstep_computed) d_step_in += blocks.xstep_block.backward(st.xstep, d_s2);
    d_step_carry = std::move(d_step_in);
  }
}

std::vector<ParamRef> SelectorNet::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const std::string p = "step" + std::to_string(s);
    StepBlocks& blocks = steps_[s];
    blocks.xstep_block.collect(p + ".xstep_block", out);
    blocks.selector.collect(p + ".selector", out);
    blocks.post_block.collect(p + ".post_block", out);
    blocks.fab.collect(p + ".fab", out);
    blocks.decision1.collect(p + ".decision1", out);
    blocks.decision2.collect(p + ".decision2", out);
  }
  head_.collect("head", out);
  return out;
}

std::vector<BufferRef> SelectorNet::buffers() {
  std::vector<BufferRef> out;
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const std::string p = "step" + std::to_string(s);
    StepBlocks& blocks = steps_[s];
    blocks.xstep_block.collect_buffers(p + ".xstep_block", out);
    blocks.post_block.collect_buffers(p + ".post_block", out);
    blocks.fab.collect_buffers(p + ".fab", out);
    blocks.decision1.collect_buffers(p + ".decision1", out);
    blocks.decision2.collect_buffers(p + ".decision2", out);
  }
  return out;
}

void SelectorNet::zero_grad() {
  for (auto& p : parameters()) p.param->zero_grad();
}

}  // namespace selnet
