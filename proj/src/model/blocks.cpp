// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cmath>
#include <utility>

#include "selnet/errors.hpp"
#include "selnet/selectornet.hpp"

namespace selnet {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view name, const std::array<std::pair<std::string_view, Enum>, N>& table,
                const char* what) {
  for (const auto& [text, value] : table)
    if (text == name) return value;
  std::string options;
  for (const auto& [text, value] : table) options += (options.empty() ? "" : ", ") + std::string(text);
  throw PreconditionError(std::string("unknown ") + what + " '" + std::string(name) +
                          "' (expected one of: " + options + ")");
}

template <class Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [text, value] : table)
    if (value == v) return text;
  return "?";
}

constexpr std::array<std::pair<std::string_view, SelectorVariant>, 6> kSelectorNames{{
    {"full", SelectorVariant::Full},
    {"stage1_only", SelectorVariant::Stage1Only},
    {"stage2_only", SelectorVariant::Stage2Only},
    {"concat", SelectorVariant::Concat},
    {"add", SelectorVariant::Add},
    {"hadamard", SelectorVariant::Hadamard},
}};
constexpr std::array<std::pair<std::string_view, FabVariant>, 2> kFabNames{{
    {"attention", FabVariant::Attention},
    {"concat_linear_relu", FabVariant::ConcatLinearRelu},
}};
constexpr std::array<std::pair<std::string_view, ResBlockVariant>, 2> kResBlockNames{{
    {"residual", ResBlockVariant::Residual},
    {"linear_relu", ResBlockVariant::LinearRelu},
}};
constexpr std::array<std::pair<std::string_view, FabStepInput>, 2> kFabStepNames{{
    {"raw", FabStepInput::Raw},
    {"processed", FabStepInput::Processed},
}};

}  // namespace

std::string_view to_string(SelectorVariant v) { return enum_name(v, kSelectorNames); }
std::string_view to_string(FabVariant v) { return enum_name(v, kFabNames); }
std::string_view to_string(ResBlockVariant v) { return enum_name(v, kResBlockNames); }
std::string_view to_string(FabStepInput v) { return enum_name(v, kFabStepNames); }

SelectorVariant parse_selector_variant(std::string_view name) {
  return parse_enum(name, kSelectorNames, "selector variant");
}
FabVariant parse_fab_variant(std::string_view name) { return parse_enum(name, kFabNames, "FAB variant"); }
ResBlockVariant parse_resblock_variant(std::string_view name) {
  return parse_enum(name, kResBlockNames, "ResBlock variant");
}
FabStepInput parse_fab_step_input(std::string_view name) {
  return parse_enum(name, kFabStepNames, "FAB step input");
}

Matrix split(const Matrix& z) {
  Matrix out = z;
  for (double& v : out.values()) {
    if (v < 0.0 || std::isnan(v)) {
      throw PreconditionError("split: input must be a ReLU output (>= 0), got " + std::to_string(v));
    }
    v = v > 0.0 ? sigmoid(v) : 0.0;
  }
  return out;
}

// --- ResBlock ---------------------------------------------------------------

ResBlock::ResBlock(std::size_t features, ResBlockVariant variant_, Rng& rng)
    : variant(variant_), inner1(features, features, rng) {
  if (variant == ResBlockVariant::Residual) {
    inner2 = Linear(features, features, rng);
    norm = BatchNorm(features);
  }
}

Matrix ResBlock::forward(const Matrix& x, bool training, ResBlockTape& tape) const {
  tape.input = x;
  tape.hidden_pre = inner1.forward(x);
  tape.recorded = true;
  if (variant == ResBlockVariant::LinearRelu) return relu(tape.hidden_pre);
  tape.hidden = relu(tape.hidden_pre);
  tape.residual_sum = x + inner2.forward(tape.hidden);
  return norm.forward(tape.residual_sum, training, &tape.norm);
}

Matrix ResBlock::forward(const Matrix& x, bool training) const {
  ResBlockTape tape;
  return forward(x, training, tape);
}

Matrix ResBlock::backward(const ResBlockTape& tape, const Matrix& dy) {
  if (!tape.recorded) throw StateError("ResBlock: backward without a recorded forward");
  if (variant == ResBlockVariant::LinearRelu) {
    return inner1.backward(tape.input, relu_backward(tape.hidden_pre, dy));
  }
  Matrix d_sum = norm.backward(tape.norm, dy);
  Matrix d_hidden = inner2.backward(tape.hidden, d_sum);
  Matrix dx = inner1.backward(tape.input, relu_backward(tape.hidden_pre, d_hidden));
  dx += d_sum;
  return dx;
}

void ResBlock::commit(const ResBlockTape& tape) {
  if (variant == ResBlockVariant::Residual) norm.commit(tape.norm);
}

void ResBlock::zero_inner() {
  inner1.zero();
  if (variant == ResBlockVariant::Residual) {
    inner2.zero();
    norm.reset_identity();
  }
}

void ResBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  inner1.collect(prefix + ".inner1", out);
  if (variant == ResBlockVariant::Residual) {
    inner2.collect(prefix + ".inner2", out);
    norm.collect(prefix + ".norm", out);
  }
}

void ResBlock::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
  if (variant == ResBlockVariant::Residual) norm.collect_buffers(prefix + ".norm", out);
}

// --- SelectorBlock ----------------------------------------------------------

SelectorBlock::SelectorBlock(std::size_t features, SelectorVariant variant_, Rng& rng)
    : variant(variant_) {
  switch (variant) {
    case SelectorVariant::Full:
    case SelectorVariant::Stage1Only:
    case SelectorVariant::Add:
    case SelectorVariant::Hadamard:
      linear.emplace(features, features, rng);
      break;
    case SelectorVariant::Concat:
      linear.emplace(2 * features, features, rng);
      break;
    case SelectorVariant::Stage2Only:
      break;
  }
}

bool SelectorBlock::uses_s1() const noexcept {
  return variant == SelectorVariant::Full || variant == SelectorVariant::Stage1Only;
}

bool SelectorBlock::uses_s2() const noexcept { return variant != SelectorVariant::Stage1Only; }

Matrix SelectorBlock::forward(const Matrix& x, const Matrix& s2, SelectorTape& tape) const {
  if (uses_s2()) require_same_shape(x, s2, "selector input", "S2");
  tape.input = x;
  tape.s2 = s2;
  tape.recorded = true;

  if (uses_s1()) {
    tape.gate_pre = linear->forward(x);
    tape.s1 = split(relu(tape.gate_pre));
    tape.stage1 = x;
    auto st = tape.stage1.values();
    auto s1 = tape.s1.values();
    for (std::size_t i = 0; i < st.size(); ++i) st[i] *= 1.0 + s1[i];
  } else {
    tape.s1 = Matrix(x.rows(), x.cols());
  }

  switch (variant) {
    case SelectorVariant::Full:
      return hadamard(tape.stage1, s2);
    case SelectorVariant::Stage1Only:
      return tape.stage1;
    case SelectorVariant::Stage2Only:
      return hadamard(x, s2);
    case SelectorVariant::Concat:
      tape.combined = concat_cols(x, s2);
      break;
    case SelectorVariant::Add:
      tape.combined = x + s2;
      break;
    case SelectorVariant::Hadamard:
      tape.combined = hadamard(x, s2);
      break;
  }
  tape.mixed_pre = linear->forward(tape.combined);
  return relu(tape.mixed_pre);
}

SelectorBlock::Gradients SelectorBlock::backward(const SelectorTape& tape, const Matrix& dy) {
  if (!tape.recorded) throw StateError("SelectorBlock: backward without a recorded forward");
  const Matrix& x = tape.input;
  Gradients g;

  auto stage1_backward = [&](const Matrix& d_stage1) {
    // stage1 = x ⊙ (1 + s1), s1 = split(relu(gate_pre))
    Matrix dx = d_stage1;
    Matrix d_gate(x.rows(), x.cols());
    auto dxv = dx.values();
    auto dg = d_gate.values();
    const auto xv = x.values();
    const auto s1 = tape.s1.values();
    const auto dst = d_stage1.values();
    for (std::size_t i = 0; i < dxv.size(); ++i) {
      dxv[i] = dst[i] * (1.0 + s1[i]);
      // split(relu(h)) is sigmoid(h) for h > 0 and 0 otherwise; s1 > 0 iff h > 0.
      if (s1[i] > 0.0) dg[i] = dst[i] * xv[i] * s1[i] * (1.0 - s1[i]);
    }
    dx += linear->backward(x, d_gate);
    return dx;
  };

  switch (variant) {
    case SelectorVariant::Full:
      g.ds2 = hadamard(dy, tape.stage1);
      g.dx = stage1_backward(hadamard(dy, tape.s2));
      return g;
    case SelectorVariant::Stage1Only:
      g.ds2 = Matrix(x.rows(), x.cols());
      g.dx = stage1_backward(dy);
      return g;
    case SelectorVariant::Stage2Only:
      g.ds2 = hadamard(dy, x);
      g.dx = hadamard(dy, tape.s2);
      return g;
    default:
      break;
  }

  Matrix d_combined = linear->backward(tape.combined, relu_backward(tape.mixed_pre, dy));
  switch (variant) {
    case SelectorVariant::Concat: {
      auto [dx, ds2] = split_cols(d_combined, x.cols());
      g.dx = std::move(dx);
      g.ds2 = std::move(ds2);
      break;
    }
    case SelectorVariant::Add:
      g.dx = d_combined;
      g.ds2 = std::move(d_combined);
      break;
    default:  // Hadamard
      g.dx = hadamard(d_combined, tape.s2);
      g.ds2 = hadamard(d_combined, x);
      break;
  }
  return g;
}

void SelectorBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  if (linear) linear->collect(prefix + ".linear", out);
}

// --- FusionAttentionBlock ---------------------------------------------------

FusionAttentionBlock::FusionAttentionBlock(std::size_t features, FabVariant variant_, Rng& rng)
    : variant(variant_) {
  if (variant == FabVariant::Attention) {
    query = Linear(features, features, rng);
    key = Linear(features, features, rng);
    dec_proj = Linear(features, features, rng);
    step_proj = Linear(features, features, rng);
    norm_dec = BatchNorm(features);
    norm_step = BatchNorm(features);
  } else {
    mix = Linear(2 * features, features, rng);
  }
}

FusionAttentionBlock::Output FusionAttentionBlock::forward(const Matrix& x, const Matrix& x_step,
                                                           bool training, FabTape& tape) const {
  require_same_shape(x, x_step, "FAB x", "FAB x_step");
  if (x.rows() == 0) throw PreconditionError("FAB: empty batch");
  tape.x = x;
  tape.x_step = x_step;
  tape.recorded = true;

  if (variant == FabVariant::ConcatLinearRelu) {
    tape.combined = concat_cols(x, x_step);
    tape.mixed_pre = mix.forward(tape.combined);
    Matrix out = relu(tape.mixed_pre);
    return {out, out};
  }

  tape.query = query.forward(x);
  tape.key = key.forward(x_step);
  tape.attention = matmul_tn(tape.query, tape.key);
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  for (double& a : tape.attention.values()) a *= inv_b;
  tape.value_x = matmul(x, tape.attention);
  tape.value_step = matmul(x_step, tape.attention);

  Output out;
  out.dec = norm_dec.forward(x + dec_proj.forward(tape.value_x), training, &tape.norm_dec);
  out.step = norm_step.forward(x_step + step_proj.forward(tape.value_step), training, &tape.norm_step);
  return out;
}

FusionAttentionBlock::Gradients FusionAttentionBlock::backward(const FabTape& tape, const Matrix& d_dec,
                                                               const Matrix& d_step) {
  if (!tape.recorded) throw StateError("FAB: backward without a recorded forward");
  Gradients g;
  if (variant == FabVariant::ConcatLinearRelu) {
    Matrix d_out = d_dec + d_step;
    Matrix d_combined = mix.backward(tape.combined, relu_backward(tape.mixed_pre, d_out));
    auto [dx, dxs] = split_cols(d_combined, tape.x.cols());
    g.dx = std::move(dx);
    g.dx_step = std::move(dxs);
    return g;
  }

  const Matrix dz_dec = norm_dec.backward(tape.norm_dec, d_dec);
  const Matrix dz_step = norm_step.backward(tape.norm_step, d_step);
  const Matrix d_vx = dec_proj.backward(tape.value_x, dz_dec);
  const Matrix d_vs = step_proj.backward(tape.value_step, dz_step);

  // V = input * A  =>  d_input = dV A^T,  dA = input^T dV
  g.dx = dz_dec + matmul_nt(d_vx, tape.attention);
  g.dx_step = dz_step + matmul_nt(d_vs, tape.attention);
  Matrix d_attn = matmul_tn(tape.x, d_vx);
  d_attn += matmul_tn(tape.x_step, d_vs);

  // A = (1/B) Q^T K  =>  dQ = (1/B) K dA^T,  dK = (1/B) Q dA
  const double inv_b = 1.0 / static_cast<double>(tape.x.rows());
  Matrix d_query = scaled(matmul_nt(tape.key, d_attn), inv_b);
  Matrix d_key = scaled(matmul(tape.query, d_attn), inv_b);
  g.dx += query.backward(tape.x, d_query);
  g.dx_step += key.backward(tape.x_step, d_key);
  return g;
}

void FusionAttentionBlock::commit(const FabTape& tape) {
  if (variant != FabVariant::Attention) return;
  norm_dec.commit(tape.norm_dec);
  norm_step.commit(tape.norm_step);
}

void FusionAttentionBlock::zero_inner() {
  if (variant == FabVariant::Attention) {
    query.zero();
    key.zero();
    dec_proj.zero();
    step_proj.zero();
    norm_dec.reset_identity();
    norm_step.reset_identity();
  } else {
    mix.zero();
  }
}

void FusionAttentionBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  if (variant == FabVariant::Attention) {
    query.collect(prefix + ".query", out);
    key.collect(prefix + ".key", out);
    dec_proj.collect(prefix + ".dec_proj", out);
    step_proj.collect(prefix + ".step_proj", out);
    norm_dec.collect(prefix + ".norm_dec", out);
    norm_step.collect(prefix + ".norm_step", out);
  } else {
    mix.collect(prefix + ".mix", out);
  }
}

void FusionAttentionBlock::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
  if (variant != FabVariant::Attention) return;
  norm_dec.collect_buffers(prefix + ".norm_dec", out);
  norm_step.collect_buffers(prefix + ".norm_step", out);
}

}  // namespace selnet
