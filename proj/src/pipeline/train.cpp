// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "selnet/errors.hpp"
#include "selnet/loss.hpp"
#include "selnet/optim.hpp"
#include "selnet/rng.hpp"

namespace selnet::pipeline {

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw PreconditionError("train: lr must be a positive finite number");
  if (batch_size < 2) throw PreconditionError("train: batch_size must be >= 2");
  if (!(threshold > 0.0 && threshold < 1.0)) throw PreconditionError("train: threshold must lie in (0, 1)");
}

double dataset_loss(const BinaryClassifier& model, const Dataset& data) {
  const std::vector<double> p = model.predict(data.features, data.embeddings);
  return bce_loss(p, data.labels);
}

TrainResult train(const BinaryClassifier& initial, const Dataset& train_set, const Dataset* val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  train_set.validate();
  TrainResult result;
  std::unique_ptr<BinaryClassifier> model = initial.clone();
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }
  if (train_set.size() < 2) throw PreconditionError("train: need at least 2 training rows");
  if (val_set != nullptr && val_set->size() == 0) val_set = nullptr;

  const std::vector<ParamRef> params = model->parameters();
  Rng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::min(config.batch_size, train_set.size());

  std::unique_ptr<BinaryClassifier> best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(OptimizerState{config.lr, epoch, config.epochs});
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t len = std::min(batch, order.size() - start);
      if (len < 2) break;
      const std::span<const std::size_t> rows(order.data() + start, len);
      const Matrix x = take_rows(train_set.features, rows);
      const Matrix e = take_rows(train_set.embeddings, rows);
      std::vector<double> y(len);
      for (std::size_t i = 0; i < len; ++i) y[i] = train_set.labels[rows[i]];

      zero_grad(params);
      const double loss = model->accumulate_gradients(x, e, y);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch " << b << ", lr " << lr;
        throw NumericError(msg.str());
      }
      sgd_step(params, lr);
      loss_sum += loss * static_cast<double>(len);
      seen += len;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    if (val_set != nullptr) {
      const double vl = dataset_loss(*model, *val_set);
      if (!std::isfinite(vl)) {
        std::ostringstream msg;
        msg << "train: non-finite validation loss at epoch " << epoch << ", lr " << lr;
        throw NumericError(msg.str());
      }
      rec.val_loss = vl;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_loss) {
      if (*rec.val_loss < best_loss) {
        best_loss = *rec.val_loss;
        best = model->clone();
        result.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= config.patience && config.patience > 0) {
        result.stopped_early = true;
        break;
      }
    }
  }
  result.model = best ? std::move(best) : std::move(model);
  return result;
}

}  // namespace selnet::pipeline
