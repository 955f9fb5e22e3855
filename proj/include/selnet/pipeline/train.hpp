// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "selnet/pipeline/classifier.hpp"
#include "selnet/pipeline/dataset.hpp"

namespace selnet::pipeline {

struct TrainConfig {
  double lr = 0.4637;
  std::size_t epochs = 584;
  std::size_t batch_size = 128;
  std::size_t patience = 50;  // 0 disables early stopping
  double threshold = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
};

struct TrainResult {
  std::unique_ptr<BinaryClassifier> model;  // best validation-loss snapshot, or the final model
  std::vector<EpochRecord> history;
  std::optional<std::size_t> best_epoch;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch SGD with cosine-annealed learning rate. `initial` is not modified.
/// NumericError (with epoch, batch and lr) on a non-finite loss.
TrainResult train(const BinaryClassifier& initial, const Dataset& train_set, const Dataset* val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Mean BCE of the model on a whole dataset, evaluated as one batch.
double dataset_loss(const BinaryClassifier& model, const Dataset& data);

}  // namespace selnet::pipeline
