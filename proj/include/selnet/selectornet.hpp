// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selnet/layers.hpp"
#include "selnet/matrix.hpp"

namespace selnet {

/// How the SelectorBlock combines the input with the processed x_step.
enum class SelectorVariant : std::uint8_t {
  Full,        // (X ⊙ (1 + S1)) ⊙ S2
  Stage1Only,  // X ⊙ (1 + S1)
  Stage2Only,  // X ⊙ S2
  Concat,      // ReLU(Linear(concat(X, S2)))   2F -> F
  Add,         // ReLU(Linear(X + S2))
  Hadamard,    // ReLU(Linear(X ⊙ S2))
};

enum class FabVariant : std::uint8_t {
  Attention,
  ConcatLinearRelu,  // both outputs = ReLU(Linear(concat(x, x_step)))
};

enum class ResBlockVariant : std::uint8_t {
  Residual,    // BN(X + Linear2(ReLU(Linear1(X))))
  LinearRelu,  // ReLU(Linear(X))
};

/// Which x_step the fusion attention block consumes: the incoming message
/// itself, or the ResBlock-processed copy used for Stage2 selection.
enum class FabStepInput : std::uint8_t { Raw, Processed };

std::string_view to_string(SelectorVariant v);
std::string_view to_string(FabVariant v);
std::string_view to_string(ResBlockVariant v);
std::string_view to_string(FabStepInput v);
/// Parse the names produced by to_string; throws PreconditionError otherwise.
SelectorVariant parse_selector_variant(std::string_view name);
FabVariant parse_fab_variant(std::string_view name);
ResBlockVariant parse_resblock_variant(std::string_view name);
FabStepInput parse_fab_step_input(std::string_view name);

struct SelectorNetConfig {
  std::size_t feature_dim = 0;
  std::size_t steps = 3;
  std::size_t embed_dim = 10;
  SelectorVariant selector_variant = SelectorVariant::Full;
  FabVariant fab_variant = FabVariant::Attention;
  ResBlockVariant resblock_variant = ResBlockVariant::Residual;
  FabStepInput fab_step_input = FabStepInput::Raw;
  std::uint64_t seed = 0;

  /// Throws PreconditionError when feature_dim or steps is zero.
  void validate() const;
  friend bool operator==(const SelectorNetConfig&, const SelectorNetConfig&) = default;
};

/// Split gate: sigmoid on strictly positive entries, 0 on zeros.
/// Input must be a ReLU output (all entries >= 0).
Matrix split(const Matrix& z);

// ---------------------------------------------------------------------------
// Blocks. Each forward fills a tape that its backward consumes; tapes are
// filled in both modes so inference can still report intermediate values.
// ---------------------------------------------------------------------------

struct ResBlockTape {
  Matrix input;
  Matrix hidden_pre;
  Matrix hidden;
  Matrix residual_sum;
  BatchNormTape norm;
  bool recorded = false;
};

class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(std::size_t features, ResBlockVariant variant, Rng& rng);

  Matrix forward(const Matrix& x, bool training, ResBlockTape& tape) const;
  Matrix forward(const Matrix& x, bool training) const;
  Matrix backward(const ResBlockTape& tape, const Matrix& dy);
  void commit(const ResBlockTape& tape);

  /// Zero both inner linears and reset the norm to identity statistics.
  void zero_inner();
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out);

  ResBlockVariant variant = ResBlockVariant::Residual;
  Linear inner1;
  Linear inner2;   // Residual only
  BatchNorm norm;  // Residual only
};

struct SelectorTape {
  Matrix input;
  Matrix s2;
  Matrix gate_pre;  // Linear(X) before ReLU/Split
  Matrix s1;
  Matrix stage1;
  Matrix combined;   // binary-op variants: input to the linear
  Matrix mixed_pre;  // binary-op variants: linear output before ReLU
  bool recorded = false;
};

class SelectorBlock {
 public:
  SelectorBlock() = default;
  SelectorBlock(std::size_t features, SelectorVariant variant, Rng& rng);

  Matrix forward(const Matrix& x, const Matrix& s2, SelectorTape& tape) const;

  struct Gradients {
    Matrix dx;
    Matrix ds2;
  };
  Gradients backward(const SelectorTape& tape, const Matrix& dy);

  bool uses_s1() const noexcept;
  bool uses_s2() const noexcept;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  SelectorVariant variant = SelectorVariant::Full;
  std::optional<Linear> linear;  // absent for Stage2Only
};

struct FabTape {
  Matrix x;
  Matrix x_step;
  Matrix query;
  Matrix key;
  Matrix attention;  // F x F
  Matrix value_x;
  Matrix value_step;
  BatchNormTape norm_dec;
  BatchNormTape norm_step;
  Matrix combined;
  Matrix mixed_pre;
  bool recorded = false;
};

/// Fusion attention block: a shared F x F attention matrix
/// A = (1/B) Q^T K with Q = Linear_q(x), K = Linear_k(x_step), applied to
/// both x and x_step as values, each followed by a projection, a shortcut to
/// its own input and a batch norm.
class FusionAttentionBlock {
 public:
  FusionAttentionBlock() = default;
  FusionAttentionBlock(std::size_t features, FabVariant variant, Rng& rng);

  struct Output {
    Matrix dec;
    Matrix step;
  };
  Output forward(const Matrix& x, const Matrix& x_step, bool training, FabTape& tape) const;

  struct Gradients {
    Matrix dx;
    Matrix dx_step;
  };
  Gradients backward(const FabTape& tape, const Matrix& d_dec, const Matrix& d_step);
  void commit(const FabTape& tape);

  /// Zero all four projections (or the mixing linear) and reset norms.
  void zero_inner();
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out);

  FabVariant variant = FabVariant::Attention;
  Linear query;
  Linear key;
  Linear dec_proj;
  Linear step_proj;
  BatchNorm norm_dec;
  BatchNorm norm_step;
  Linear mix;  // ConcatLinearRelu only, 2F -> F
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Intermediate values of one step, as used for the decision and for the
/// attention report.
struct StepTrace {
  Matrix s1;
  Matrix s2;
  Matrix x_step_in;
  Matrix x_step_out;
  Matrix x_dec;
};

struct ForwardResult {
  std::vector<double> logit;
  std::vector<double> prob;
  std::vector<StepTrace> traces;
};

struct StepBlocks {
  ResBlock xstep_block;  // S2 = ResBlock(x_step)
  SelectorBlock selector;
  ResBlock post_block;  // ResBlock after the selector
  FusionAttentionBlock fab;
  ResBlock decision1;
  ResBlock decision2;
};

struct StepTape {
  Matrix x_step_in;
  bool xstep_computed = false;
  ResBlockTape xstep;
  SelectorTape selector;
  ResBlockTape post;
  FabTape fab;
  ResBlockTape decision1;
  ResBlockTape decision2;
};

struct ForwardTape {
  std::vector<StepTape> steps;
  Matrix head_input;
  std::size_t batch = 0;
  bool training = false;
  bool recorded = false;
};

class SelectorNet {
 public:
  /// Builds and initialises all parameters from config.seed.
  explicit SelectorNet(const SelectorNetConfig& config);

  const SelectorNetConfig& config() const noexcept { return config_; }

  /// x is B x F (normalized features), embed is B x E (E may be 0).
  /// The tape, when given, records everything backward() needs.
  ForwardResult forward(const Matrix& x, const Matrix& embed, bool training,
                        ForwardTape* tape = nullptr) const;
  /// Inference-mode forward.
  ForwardResult predict(const Matrix& x, const Matrix& embed) const {
    return forward(x, embed, false);
  }

  /// Fold the batch statistics of a training-mode tape into running stats.
  void commit_statistics(const ForwardTape& tape);
  /// Accumulate parameter gradients given dL/dlogit per sample.
  void backward(const ForwardTape& tape, std::span<const double> dlogit);

  std::vector<ParamRef> parameters();
  std::vector<BufferRef> buffers();
  void zero_grad();

  std::vector<StepBlocks>& steps() noexcept { return steps_; }
  const std::vector<StepBlocks>& steps() const noexcept { return steps_; }
  Linear& head() noexcept { return head_; }
  const Linear& head() const noexcept { return head_; }

 private:
  SelectorNetConfig config_;
  std::vector<StepBlocks> steps_;
  Linear head_;  // (F + E) -> 1
};

}  // namespace selnet
