// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "selnet/attention.hpp"
#include "selnet/checkpoint.hpp"
#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"
#include "selnet/rng.hpp"

namespace selnet::pipeline {

std::unique_ptr<BinaryClassifier> make_model(const ModelSpec& spec, std::size_t feature_dim, std::size_t embed_dim,
                                             std::uint64_t seed) {
  if (spec.kind == ModelKind::Logistic) return std::make_unique<LogisticClassifier>(feature_dim, embed_dim, seed);
  SelectorNetConfig cfg = spec.net;
  cfg.feature_dim = feature_dim;
  cfg.embed_dim = embed_dim;
  cfg.seed = seed;
  return std::make_unique<SelectorNetClassifier>(cfg);
}

namespace {

struct InnerSplit {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> val;
};

// Holds out a seeded share of `rows` for early stopping.
InnerSplit inner_split(std::vector<std::size_t> rows, double fraction, std::uint64_t seed) {
  InnerSplit out;
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
  if (held == 0 || held + 2 > rows.size()) {
    out.fit = std::move(rows);
    return out;
  }
  Rng rng(splitmix64(seed));
  rng.shuffle(std::span<std::size_t>(rows));
  out.val.assign(rows.begin(), rows.begin() + static_cast<long>(held));
  out.fit.assign(rows.begin() + static_cast<long>(held), rows.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.fit.begin(), out.fit.end());
  return out;
}

std::optional<std::vector<double>> test_attention(const BinaryClassifier& model, const Dataset& test) {
  const auto* sn = dynamic_cast<const SelectorNetClassifier*>(&model);
  if (sn == nullptr) return std::nullopt;
  const ForwardResult out = sn->net().predict(test.features, test.embeddings);
  return mean_abs_attention(attention(out.traces, test.schema.names()));
}

FoldOutcome run_fold(const Dataset& data, const FoldSplit& split, std::size_t k, const ModelSpec& spec,
                     const CvConfig& config) {
  const std::uint64_t seed = config.seed + k;
  FoldOutcome out;
  out.fold = k;
  out.test_rows = split[k];
  const std::vector<std::size_t> train_rows = training_rows(split, k);
  auto [normed, stats] = normalize(data, config.norm, train_rows);
  out.norm = std::move(stats);

  const InnerSplit inner =
      config.train.patience > 0 ? inner_split(train_rows, config.inner_val_fraction, seed) : InnerSplit{train_rows, {}};
  const Dataset fit = normed.subset(inner.fit);
  const Dataset val = normed.subset(inner.val);
  const Dataset test = normed.subset(out.test_rows);

  TrainConfig tc = config.train;
  tc.seed = seed;
  const auto initial = make_model(spec, data.schema.size(), data.embed_dim(), seed);
  out.training = train(*initial, fit, inner.val.empty() ? nullptr : &val, tc);
  const std::vector<double> p = out.training.model->predict(test.features, test.embeddings);
  out.metrics = evaluate_predictions(p, test.labels, tc.threshold);
  out.attention = test_attention(*out.training.model, test);
  return out;
}

}  // namespace

CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const CvConfig& config) {
  data.validate();
  CvResult result;
  result.split = kfold_split(data.size(), config.folds, config.seed);
  result.folds.resize(config.folds);
  if (!config.parallel || config.folds == 1) {
    for (std::size_t k = 0; k < config.folds; ++k) result.folds[k] = run_fold(data, result.split, k, spec, config);
    return result;
  }
  std::vector<std::exception_ptr> errors(config.folds);
  std::vector<std::thread> workers;
  workers.reserve(config.folds);
  for (std::size_t k = 0; k < config.folds; ++k) {
    workers.emplace_back([&, k] {
      try {
        result.folds[k] = run_fold(data, result.split, k, spec, config);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

namespace {

MetricSummary summarize_values(const std::vector<std::optional<double>>& values) {
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) v.push_back(*x);
  }
  MetricSummary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

CvSummary summarize(const CvResult& result) {
  std::vector<std::optional<double>> acc, prec, rec, spec;
  for (const auto& f : result.folds) {
    acc.emplace_back(f.metrics.accuracy);
    prec.push_back(f.metrics.precision);
    rec.push_back(f.metrics.recall);
    spec.push_back(f.metrics.specificity);
  }
  return {summarize_values(acc), summarize_values(prec), summarize_values(rec), summarize_values(spec)};
}

std::string metrics_csv(const CvResult& result) {
  std::ostringstream out;
  write_csv_row(out, {"fold", "n_test", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "specificity"});
  for (const auto& f : result.folds) {
    const Confusion& c = f.metrics.confusion;
    write_csv_row(out, {std::to_string(f.fold), std::to_string(c.total()), std::to_string(c.tp), std::to_string(c.tn),
                        std::to_string(c.fp), std::to_string(c.fn), format_double(f.metrics.accuracy),
                        cell(f.metrics.precision), cell(f.metrics.recall), cell(f.metrics.specificity)});
  }
  const CvSummary s = summarize(result);
  write_csv_row(out, {"mean", "", "", "", "", "", cell(s.accuracy.mean), cell(s.precision.mean), cell(s.recall.mean),
                      cell(s.specificity.mean)});
  write_csv_row(out, {"std", "", "", "", "", "", cell(s.accuracy.std), cell(s.precision.std), cell(s.recall.std),
                      cell(s.specificity.std)});
  return out.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

void write_run_directory(const std::filesystem::path& dir, const CvResult& result, const Dataset& data,
                         const std::vector<std::pair<std::string, std::string>>& manifest) {
  if (std::filesystem::exists(dir)) {
    throw DataError("run directory " + dir.string() + " already exists; choose a new --out");
  }
  std::filesystem::create_directories(dir);

  write_text(dir / "metrics.csv", metrics_csv(result));

  std::ostringstream history;
  write_csv_row(history, {"fold", "epoch", "lr", "train_loss", "val_loss"});
  for (const auto& f : result.folds) {
    for (const auto& h : f.training.history) {
      write_csv_row(history, {std::to_string(f.fold), std::to_string(h.epoch), format_double(h.lr),
                              format_double(h.train_loss), cell(h.val_loss)});
    }
  }
  write_text(dir / "history.csv", history.str());

  const bool have_attention =
      std::all_of(result.folds.begin(), result.folds.end(), [](const FoldOutcome& f) { return f.attention.has_value(); });
  if (have_attention && !result.folds.empty()) {
    std::ostringstream attn;
    std::vector<std::string> header{"fold"};
    for (const auto& n : data.schema.names()) header.push_back(n);
    write_csv_row(attn, header);
    for (const auto& f : result.folds) {
      std::vector<std::string> row{std::to_string(f.fold)};
      for (double v : *f.attention) row.push_back(format_double(v));
      write_csv_row(attn, row);
    }
    write_text(dir / "attention.csv", attn.str());
  }

  for (const auto& f : result.folds) {
    const std::string stem = "fold" + std::to_string(f.fold);
    if (const auto* sn = dynamic_cast<const SelectorNetClassifier*>(f.training.model.get())) {
      save_checkpoint(sn->net(), dir / (stem + ".ckpt"));
    }
    write_norm_stats(f.norm, data.schema, dir / (stem + ".norm.csv"));
  }

  std::ostringstream m;
  for (const auto& [key, value] : manifest) m << key << '=' << value << '\n';
  for (const auto& f : result.folds) {
    m << "fold" << f.fold << ".best_epoch=" << (f.training.best_epoch ? std::to_string(*f.training.best_epoch) : "NA")
      << '\n';
    m << "fold" << f.fold << ".epochs_run=" << f.training.history.size() << '\n';
  }
  write_text(dir / "manifest.txt", m.str());
}

std::vector<AblationVariant> ablation_variants(const SelectorNetConfig& base) {
  std::vector<AblationVariant> out;
  out.push_back({"full", base});
  for (SelectorVariant v : {SelectorVariant::Stage1Only, SelectorVariant::Stage2Only, SelectorVariant::Concat,
                            SelectorVariant::Add, SelectorVariant::Hadamard}) {
    SelectorNetConfig c = base;
    c.selector_variant = v;
    out.push_back({"selector=" + std::string(to_string(v)), c});
  }
  SelectorNetConfig fab = base;
  fab.fab_variant = FabVariant::ConcatLinearRelu;
  out.push_back({"fab=" + std::string(to_string(fab.fab_variant)), fab});
  SelectorNetConfig res = base;
  res.resblock_variant = ResBlockVariant::LinearRelu;
  out.push_back({"resblock=" + std::string(to_string(res.resblock_variant)), res});
  return out;
}

std::vector<AblationRow> run_ablation(const Dataset& data, const std::vector<AblationVariant>& variants,
                                      const CvConfig& config) {
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    const CvResult r = cross_validate(data, ModelSpec{ModelKind::SelectorNet, v.net}, config);
    AblationRow row;
    row.name = v.name;
    row.summary = summarize(r);
    row.complete = true;
    for (const auto& f : r.folds) {
      const Metrics& m = f.metrics;
      if (!m.precision || !m.recall || !m.specificity || !std::isfinite(m.accuracy)) row.complete = false;
      for (const auto& h : f.training.history) {
        if (!std::isfinite(h.train_loss) || (h.val_loss && !std::isfinite(*h.val_loss))) row.complete = false;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  write_csv_row(out, {"variant", "accuracy_mean", "accuracy_std", "precision_mean", "precision_std", "recall_mean",
                      "recall_std", "specificity_mean", "specificity_std", "complete"});
  for (const auto& r : rows) {
    const CvSummary& s = r.summary;
    write_csv_row(out, {r.name, cell(s.accuracy.mean), cell(s.accuracy.std), cell(s.precision.mean),
                        cell(s.precision.std), cell(s.recall.mean), cell(s.recall.std), cell(s.specificity.mean),
                        cell(s.specificity.std), r.complete ? "yes" : "no"});
  }
  return out.str();
}

Dataset append_noise(const Dataset& data, std::size_t n_noise, std::uint64_t seed) {
  if (n_noise == 0) return data;
  std::vector<std::string> names = data.schema.names();
  for (std::size_t j = 0; j < n_noise; ++j) {
    const std::string name = "noise_" + std::to_string(j);
    if (data.schema.index_of(name)) throw DataError("data already has a column named " + name);
    names.push_back(name);
  }
  Dataset out = data;
  out.schema = FeatureSchema(names);
  const std::size_t f = data.schema.size();
  out.features = Matrix(data.size(), f + n_noise);
  Rng rng(splitmix64(seed ^ 0x6e6f697365ULL));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < f; ++j) out.features(i, j) = data.features(i, j);
    for (std::size_t j = 0; j < n_noise; ++j) out.features(i, f + j) = rng.uniform01();
  }
  return out;
}

NoiseReport noise_experiment(const Dataset& data, const NoiseConfig& config) {
  data.validate();
  const Dataset full = append_noise(data, config.n_noise, config.seed);
  const std::size_t n = full.size();
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw PreconditionError("noise experiment: val_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val + 2 > n) throw PreconditionError("noise experiment: too few rows for the split");
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<long>(n_val), order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  const Dataset normed = normalize(full, config.norm, train_rows).first;
  const InnerSplit inner = config.train.patience > 0 ? inner_split(train_rows, 0.15, config.seed)
                                                     : InnerSplit{train_rows, {}};
  const Dataset fit = normed.subset(inner.fit);
  const Dataset stop = normed.subset(inner.val);
  const Dataset val = normed.subset(val_rows);

  SelectorNetConfig net = config.net;
  net.feature_dim = full.schema.size();
  net.embed_dim = full.embed_dim();
  net.seed = config.seed;
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  const SelectorNetClassifier initial(net);
  const TrainResult trained = train(initial, fit, inner.val.empty() ? nullptr : &stop, tc);
  const auto& model = dynamic_cast<const SelectorNetClassifier&>(*trained.model);

  const ForwardResult out = model.net().predict(val.features, val.embeddings);
  NoiseReport report;
  report.names = full.schema.names();
  report.attention = mean_abs_attention(attention(out.traces, report.names));
  report.val_metrics = evaluate_predictions(out.prob, val.labels, tc.threshold);

  std::vector<std::string> informative = config.informative;
  if (informative.empty()) {
    for (const auto& name : data.schema.names()) {
      if (name.rfind("inf_", 0) == 0) informative.push_back(name);
    }
  }
  if (informative.empty()) informative = data.schema.names();
  for (const auto& name : informative) {
    const auto idx = full.schema.index_of(name);
    if (!idx) throw DataError("noise experiment: unknown informative feature '" + name + "'");
    report.informative.push_back(*idx);
  }
  for (std::size_t j = data.schema.size(); j < full.schema.size(); ++j) report.noise.push_back(j);

  auto mean_of = [&](const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += report.attention[i];
    return s / static_cast<double>(idx.size());
  };
  if (!report.noise.empty()) {
    const double noise_mean = mean_of(report.noise);
    if (noise_mean > 0.0) report.ratio = mean_of(report.informative) / noise_mean;
  }
  const auto top = std::max_element(report.attention.begin(), report.attention.end());
  report.top_feature = report.names[static_cast<std::size_t>(top - report.attention.begin())];
  return report;
}

void write_noise_report(const NoiseReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "#ratio=" << cell(report.ratio) << '\n';
  out << "#top_feature=" << report.top_feature << '\n';
  out << "#val_accuracy=" << format_double(report.val_metrics.accuracy) << '\n';
  write_csv_row(out, {"feature", "group", "mean_abs_attention"});
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    const bool is_inf = std::find(report.informative.begin(), report.informative.end(), i) != report.informative.end();
    const bool is_noise = std::find(report.noise.begin(), report.noise.end(), i) != report.noise.end();
    write_csv_row(out, {report.names[i], is_inf ? "informative" : is_noise ? "noise" : "other",
                        format_double(report.attention[i])});
  }
  write_text(path, out.str());
}

}  // namespace selnet::pipeline
