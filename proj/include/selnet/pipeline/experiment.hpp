// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selnet/pipeline/classifier.hpp"
#include "selnet/pipeline/dataset.hpp"
#include "selnet/pipeline/kfold.hpp"
#include "selnet/pipeline/metrics.hpp"
#include "selnet/pipeline/normalize.hpp"
#include "selnet/pipeline/train.hpp"

namespace selnet::pipeline {

enum class ModelKind { SelectorNet, Logistic };

/// feature_dim and embed_dim are taken from the data; the seed from the fold.
struct ModelSpec {
  ModelKind kind = ModelKind::SelectorNet;
  SelectorNetConfig net;
};

std::unique_ptr<BinaryClassifier> make_model(const ModelSpec& spec, std::size_t feature_dim, std::size_t embed_dim,
                                             std::uint64_t seed);

struct CvConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  TrainConfig train;
  NormPolicy norm = NormPolicy::TrainFold;
  /// Share of each fold's training rows held out for early stopping.
  double inner_val_fraction = 0.15;
  bool parallel = true;
};

struct FoldOutcome {
  std::size_t fold = 0;
  std::vector<std::size_t> test_rows;
  Metrics metrics;
  TrainResult training;
  NormStats norm;
  /// Mean |attention| per feature over the test fold (SelectorNet only).
  std::optional<std::vector<double>> attention;
};

struct CvResult {
  FoldSplit split;
  std::vector<FoldOutcome> folds;
};

/// Fold k uses seed + k for its model and minibatch order.
CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const CvConfig& config);

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> std;  // sample standard deviation over folds with a defined value
};

struct CvSummary {
  MetricSummary accuracy, precision, recall, specificity;
};

CvSummary summarize(const CvResult& result);

/// metrics.csv, history.csv, attention.csv, fold checkpoints with norm sidecars, manifest.txt.
/// DataError if the directory already exists.
void write_run_directory(const std::filesystem::path& dir, const CvResult& result, const Dataset& data,
                         const std::vector<std::pair<std::string, std::string>>& manifest);

std::string metrics_csv(const CvResult& result);

struct AblationVariant {
  std::string name;
  SelectorNetConfig net;
};

/// The full model followed by each single-switch ablation.
std::vector<AblationVariant> ablation_variants(const SelectorNetConfig& base = {});

struct AblationRow {
  std::string name;
  CvSummary summary;
  /// Every fold's metrics defined and its training history finite.
  bool complete = false;
};

std::vector<AblationRow> run_ablation(const Dataset& data, const std::vector<AblationVariant>& variants,
                                      const CvConfig& config);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct NoiseConfig {
  std::size_t n_noise = 30;
  std::uint64_t seed = 42;
  TrainConfig train;
  SelectorNetConfig net;
  NormPolicy norm = NormPolicy::TrainFold;
  double val_fraction = 0.2;
  /// Defaults to the inf_* features, or every original feature when there are none.
  std::vector<std::string> informative;
};

struct NoiseReport {
  std::vector<std::string> names;
  std::vector<double> attention;  // mean |attn_all| over the validation rows
  std::vector<std::size_t> informative;
  std::vector<std::size_t> noise;
  std::optional<double> ratio;    // informative mean over noise mean
  std::string top_feature;
  Metrics val_metrics;
};

/// Appends uniform [0, 1) columns noise_0.. independent of the labels.
Dataset append_noise(const Dataset& data, std::size_t n_noise, std::uint64_t seed);

NoiseReport noise_experiment(const Dataset& data, const NoiseConfig& config);
void write_noise_report(const NoiseReport& report, const std::filesystem::path& path);

}  // namespace selnet::pipeline
