// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "selnet/checkpoint.hpp"
#include "selnet/errors.hpp"
#include "selnet/optim.hpp"
#include "selnet/pipeline/csv.hpp"
#include "selnet/pipeline/dataset.hpp"
#include "selnet/pipeline/experiment.hpp"
#include "selnet/pipeline/extract.hpp"
#include "selnet/pipeline/kfold.hpp"
#include "selnet/pipeline/metrics.hpp"
#include "selnet/pipeline/normalize.hpp"
#include "selnet/pipeline/synth.hpp"
#include "selnet/pipeline/train.hpp"
#include "selnet/rng.hpp"
#include "selnet/tongue/image.hpp"

namespace selnet::pipeline {
namespace {

std::filesystem::path fresh_path(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("selnet_pipeline_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class F>
std::string error_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

// --- csv / dataset -----------------------------------------------------------

TEST(Csv, QuotedFieldsAndComments) {
  const CsvTable t = parse_csv("#hello\na,b\n\"x,1\",\"say \"\"hi\"\"\"\n2,3\n", "mem");
  ASSERT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.comments[0], "hello");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.line_numbers[1], 4u);
}

TEST(Csv, RaggedRowNamesLine) {
  const std::string msg = error_message([] { parse_csv("a,b\n1,2\n3\n", "f.csv"); });
  EXPECT_NE(msg.find("f.csv:3"), std::string::npos) << msg;
}

TEST(Csv, FormatRoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
    EXPECT_EQ(parse_double(format_double(v), "m", 1, "c"), v);
  }
  EXPECT_THROW(parse_double("nan", "m", 1, "c"), DataError);
  EXPECT_THROW(parse_double("1.5x", "m", 1, "c"), DataError);
}

TEST(Dataset, ThreeRowFile) {
  const Dataset d = parse_dataset("id,Age,BMI,label,emb_0\na,30,22.5,0,0.1\nb,40,27,1,0.2\nc,50,31,1,0.3\n", "m");
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.schema.names(), (std::vector<std::string>{"Age", "BMI"}));
  EXPECT_EQ(d.embed_dim(), 1u);
  EXPECT_EQ(d.features(2, 1), 31.0);
  EXPECT_EQ(d.ids[1], "b");
}

TEST(Dataset, MissingColumnIsNamed) {
  const FeatureSchema schema({"Age", "BMI"});
  const std::string msg = error_message([&] { parse_dataset("Age,label\n30,0\n", "m", schema); });
  EXPECT_NE(msg.find("BMI"), std::string::npos) << msg;
}

TEST(Dataset, BadLabelCitesRow) {
  std::string text = "x,label\n";
  for (int r = 1; r <= 8; ++r) text += std::to_string(r) + "," + (r == 7 ? "2" : "0") + "\n";
  try {
    parse_dataset(text, "m");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("label"), std::string::npos) << msg;
  }
}

TEST(Dataset, NonNumericCellNamesRowAndColumn) {
  const std::string msg = error_message([] { parse_dataset("x,y,label\n1,2,0\n3,abc,1\n", "m"); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'y'"), std::string::npos) << msg;
}

TEST(Dataset, CsvRoundTrip) {
  SynthConfig cfg;
  cfg.n = 120;
  const Dataset d = synth_generate(cfg);
  const Dataset back = parse_dataset(dataset_to_csv(d), "m");
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.embeddings, d.embeddings);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.ids, d.ids);
  EXPECT_EQ(back.comments, d.comments);
}

TEST(Dataset, MajorityRate) {
  const std::vector<double> y{1, 1, 1, 0};
  EXPECT_EQ(majority_rate(y), 0.75);
}

// --- normalization -----------------------------------------------------------

TEST(Normalize, MidpointEndpointsConstant) {
  const Matrix x = Matrix::from_rows({{2, 5}, {7, 5}, {12, 5}});
  const NormStats s = fit_norm(x, all_rows(3), NormPolicy::Global);
  const Matrix y = apply_norm(s, x);
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_EQ(y(1, 0), 0.5);
  EXPECT_EQ(y(2, 0), 1.0);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(y(r, 1), 0.0);
}

TEST(Normalize, TrainFoldClampsOutsideRange) {
  Dataset d;
  d.schema = FeatureSchema({"k"});
  d.features = Matrix::from_rows({{2}, {12}, {-3}, {20}});
  d.labels = {0, 1, 0, 1};
  d.embeddings = Matrix(4, 0);
  const std::vector<std::size_t> fit{0, 1};
  auto [out, stats] = normalize(d, NormPolicy::TrainFold, fit);
  EXPECT_EQ(stats.k_min[0], 2.0);
  EXPECT_EQ(stats.k_max[0], 12.0);
  EXPECT_EQ(out.features(2, 0), 0.0);
  EXPECT_EQ(out.features(3, 0), 1.0);
  auto [global, gstats] = normalize(d, NormPolicy::Global, fit);
  EXPECT_EQ(gstats.k_min[0], -3.0);
  EXPECT_EQ(global.features(3, 0), 1.0);
}

TEST(Normalize, EmptyFitSet) {
  const Matrix x(3, 2);
  EXPECT_THROW(fit_norm(x, {}, NormPolicy::TrainFold), PreconditionError);
}

TEST(Normalize, PolicyNames) {
  EXPECT_EQ(parse_norm_policy("global"), NormPolicy::Global);
  EXPECT_EQ(parse_norm_policy(to_string(NormPolicy::TrainFold)), NormPolicy::TrainFold);
  EXPECT_THROW(parse_norm_policy("zscore"), PreconditionError);
}

TEST(Normalize, StatsFileRoundTrip) {
  const FeatureSchema schema({"a", "b"});
  NormStats s{{0.1, -4.0}, {2.0 / 3.0, 8.0}, NormPolicy::Global};
  const auto p = fresh_path("norm.csv");
  write_norm_stats(s, schema, p);
  const NormStats back = read_norm_stats(p, schema);
  EXPECT_EQ(back.k_min, s.k_min);
  EXPECT_EQ(back.k_max, s.k_max);
  EXPECT_EQ(back.policy, NormPolicy::Global);
  EXPECT_THROW(read_norm_stats(p, FeatureSchema({"a", "c"})), DataError);
}

// --- folds -------------------------------------------------------------------

TEST(KFold, TenRowsFivePairs) {
  const FoldSplit s = kfold_split(10, 5, 3);
  std::vector<std::size_t> seen;
  for (const auto& f : s) {
    EXPECT_EQ(f.size(), 2u);
    seen.insert(seen.end(), f.begin(), f.end());
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, all_rows(10));
}

TEST(KFold, ElevenRowsSizes) {
  const FoldSplit s = kfold_split(11, 5, 3);
  std::vector<std::size_t> sizes;
  for (const auto& f : s) sizes.push_back(f.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
}

TEST(KFold, DeterministicAndSeedSensitive) {
  EXPECT_EQ(kfold_split(50, 5, 9), kfold_split(50, 5, 9));
  EXPECT_NE(kfold_split(50, 5, 9), kfold_split(50, 5, 10));
}

TEST(KFold, DisjointCoveringExhaustive) {
  for (std::size_t n = 2; n <= 40; ++n) {
    for (std::size_t k = 2; k <= std::min<std::size_t>(n, 7); ++k) {
      const FoldSplit s = kfold_split(n, k, n * 31 + k);
      std::vector<int> count(n, 0);
      std::size_t lo = n, hi = 0;
      for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t i : s[f]) ++count[i];
        lo = std::min(lo, s[f].size());
        hi = std::max(hi, s[f].size());
        const auto train = training_rows(s, f);
        EXPECT_EQ(train.size() + s[f].size(), n);
      }
      EXPECT_TRUE(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; })) << n << " " << k;
      EXPECT_LE(hi - lo, 1u);
    }
  }
}

TEST(KFold, TooFewRows) {
  EXPECT_THROW(kfold_split(4, 5, 0), PreconditionError);
  EXPECT_THROW(kfold_split(10, 1, 0), PreconditionError);
}

// --- metrics -----------------------------------------------------------------

TEST(Metrics, ConfusionExample) {
  const Metrics m = metrics_from_confusion({8, 6, 2, 4});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(*m.precision, 0.8);
  EXPECT_NEAR(*m.recall, 0.6667, 5e-5);
  EXPECT_DOUBLE_EQ(*m.specificity, 0.75);
}

TEST(Metrics, AllCorrect) {
  const std::vector<double> p{0.9, 0.2, 0.7, 0.1}, y{1, 0, 1, 0};
  const Metrics m = evaluate_predictions(p, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(*m.precision, 1.0);
  EXPECT_EQ(*m.recall, 1.0);
  EXPECT_EQ(*m.specificity, 1.0);
}

TEST(Metrics, NoPositivePredictions) {
  const std::vector<double> p{0.1, 0.2, 0.3}, y{1, 0, 0};
  const Metrics m = evaluate_predictions(p, y);
  EXPECT_FALSE(m.precision.has_value());
  ASSERT_TRUE(m.specificity.has_value());
  EXPECT_EQ(*m.specificity, 1.0);
}

TEST(Metrics, ThresholdIsInclusive) {
  const std::vector<double> p{0.5}, y{1};
  EXPECT_EQ(evaluate_predictions(p, y).confusion.tp, 1u);
}

TEST(Metrics, EmptySet) { EXPECT_THROW(evaluate_predictions({}, {}), PreconditionError); }

TEST(Metrics, IdentitiesOverRandomCounts) {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    Confusion c{rng.below(20), rng.below(20), rng.below(20), rng.below(20)};
    if (c.total() == 0) continue;
    const Metrics m = metrics_from_confusion(c);
    const double n = static_cast<double>(c.total());
    EXPECT_EQ(m.accuracy, static_cast<double>(c.tp + c.tn) / n);
    EXPECT_EQ(m.precision.has_value(), c.tp + c.fp > 0);
    EXPECT_EQ(m.recall.has_value(), c.tp + c.fn > 0);
    EXPECT_EQ(m.specificity.has_value(), c.tn + c.fp > 0);
    if (m.recall && m.specificity) {
      // accuracy is the prevalence-weighted mean of recall and specificity
      const double pos = static_cast<double>(c.tp + c.fn), neg = static_cast<double>(c.tn + c.fp);
      EXPECT_NEAR(m.accuracy, (*m.recall * pos + *m.specificity * neg) / n, 1e-15);
    }
  }
}

// --- training ----------------------------------------------------------------

Dataset toy(std::size_t n, std::uint64_t seed, bool separable) {
  Rng rng(seed);
  Dataset d;
  d.schema = FeatureSchema({"a", "b"});
  d.features = Matrix(n, 2);
  d.embeddings = Matrix(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform01(), b = rng.uniform01();
    double y = rng.below(2) == 1 ? 1.0 : 0.0;
    if (separable) {
      // margin of 0.1 around the line a + b = 1
      const double s = a + b - 1.0;
      if (std::abs(s) < 0.1) {
        --i;
        continue;
      }
      y = s > 0 ? 1.0 : 0.0;
    }
    d.features(i, 0) = a;
    d.features(i, 1) = b;
    d.labels.push_back(y);
  }
  return d;
}

TEST(Train, ZeroEpochsLeavesModelUnchanged) {
  LogisticClassifier m(2, 0, 5);
  const Dataset d = toy(40, 1, true);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(m, d, nullptr, cfg);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.model->predict(d.features, d.embeddings), m.predict(d.features, d.embeddings));
}

TEST(Train, HistoryLrFollowsSchedule) {
  LogisticClassifier m(2, 0, 5);
  const Dataset d = toy(64, 2, true);
  TrainConfig cfg;
  cfg.epochs = 17;
  cfg.batch_size = 16;
  const TrainResult r = train(m, d, &d, cfg);
  ASSERT_EQ(r.history.size(), 17u);
  for (const auto& h : r.history) {
    EXPECT_EQ(h.lr, cosine_lr(OptimizerState{cfg.lr, h.epoch, cfg.epochs}));
    EXPECT_TRUE(h.val_loss.has_value());
  }
}

TEST(Train, InitialModelNotModified) {
  LogisticClassifier m(2, 0, 5);
  const Matrix w = m.linear().weight.value;
  TrainConfig cfg;
  cfg.epochs = 5;
  train(m, toy(64, 3, true), nullptr, cfg);
  EXPECT_EQ(m.linear().weight.value, w);
}

class NanModel final : public BinaryClassifier {
 public:
  std::vector<double> predict(const Matrix& x, const Matrix&) const override {
    return std::vector<double>(x.rows(), 0.5);
  }
  double accumulate_gradients(const Matrix&, const Matrix&, std::span<const double>) override { return std::nan(""); }
  std::vector<ParamRef> parameters() override { return {}; }
  std::unique_ptr<BinaryClassifier> clone() const override { return std::make_unique<NanModel>(); }
  std::string name() const override { return "nan"; }
};

TEST(Train, NonFiniteLossReportsEpochBatchLr) {
  TrainConfig cfg;
  cfg.epochs = 3;
  const std::string msg = error_message([&] { train(NanModel{}, toy(20, 4, true), nullptr, cfg); });
  EXPECT_NE(msg.find("epoch 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("batch 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lr 0.4637"), std::string::npos) << msg;
  EXPECT_THROW(train(NanModel{}, toy(20, 4, true), nullptr, cfg), NumericError);
}

TEST(Train, EarlyStoppingReturnsBestSnapshot) {
  const Dataset d = toy(200, 5, false);
  const Dataset val = toy(100, 6, false);
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.patience = 5;
  cfg.batch_size = 32;
  const TrainResult r = train(LogisticClassifier(2, 0, 1), d, &val, cfg);
  ASSERT_TRUE(r.best_epoch.has_value());
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.history.size(), *r.best_epoch + cfg.patience + 1);
  EXPECT_EQ(dataset_loss(*r.model, val), *r.history[*r.best_epoch].val_loss);
}

TEST(Train, ShortFinalBatchDropped) {
  // 9 rows with batch 4 leaves a single-row batch, which batch norm cannot take.
  SynthConfig sc;
  sc.n = 100;
  Dataset d = synth_generate(sc);
  d = d.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
  d = normalize(d, NormPolicy::Global, {}).first;
  SelectorNetConfig nc;
  nc.feature_dim = 20;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  EXPECT_NO_THROW(train(SelectorNetClassifier(nc), d, nullptr, cfg));
}

TEST(Logistic, SeparableToySet) {
  const Dataset tr = toy(400, 10, true), te = toy(200, 11, true);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.patience = 0;
  cfg.batch_size = 32;
  const TrainResult r = train(LogisticClassifier(2, 0, 3), tr, nullptr, cfg);
  const Metrics m = evaluate_predictions(r.model->predict(te.features, te.embeddings), te.labels);
  EXPECT_GE(m.accuracy, 0.95);
}

TEST(Logistic, RandomLabelsNearChance) {
  const Dataset tr = toy(1600, 12, false), te = toy(400, 13, false);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.patience = 0;
  const TrainResult r = train(LogisticClassifier(2, 0, 3), tr, nullptr, cfg);
  const Metrics m = evaluate_predictions(r.model->predict(te.features, te.embeddings), te.labels);
  EXPECT_NEAR(m.accuracy, 0.5, 0.1);
}

TEST(Logistic, Deterministic) {
  const Dataset tr = toy(300, 14, false);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 8;
  const auto a = train(LogisticClassifier(2, 0, 3), tr, nullptr, cfg);
  const auto b = train(LogisticClassifier(2, 0, 3), tr, nullptr, cfg);
  EXPECT_EQ(a.model->predict(tr.features, tr.embeddings), b.model->predict(tr.features, tr.embeddings));
}

TEST(SelectorNetTraining, PlantedSignalSingleSplit) {
  SynthConfig sc;
  sc.n = 1000;
  const Dataset d = synth_generate(sc);
  const FoldSplit s = kfold_split(d.size(), 5, 1);
  const auto tr_rows = training_rows(s, 0);
  const Dataset n = normalize(d, NormPolicy::TrainFold, tr_rows).first;
  SelectorNetConfig nc;
  nc.feature_dim = 20;
  nc.seed = 1;
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.patience = 0;
  cfg.seed = 1;
  const TrainResult r = train(SelectorNetClassifier(nc), n.subset(tr_rows), nullptr, cfg);
  const Dataset te = n.subset(s[0]);
  const Metrics m = evaluate_predictions(r.model->predict(te.features, te.embeddings), te.labels);
  EXPECT_GE(m.accuracy, majority_rate(te.labels) + 0.15);
}

// --- synthetic data ------------------------------------------------------------

TEST(Synth, DefaultShapeAndBalance) {
  const Dataset d = synth_generate({});
  EXPECT_EQ(d.size(), 2000u);
  EXPECT_EQ(d.schema.size(), 20u);
  EXPECT_EQ(d.embed_dim(), 10u);
  const double pos = std::accumulate(d.labels.begin(), d.labels.end(), 0.0) / 2000.0;
  EXPECT_GE(pos, 0.45);
  EXPECT_LE(pos, 0.55);
  EXPECT_EQ(informative_names(d), (std::vector<std::string>{"inf_0", "inf_1", "inf_2", "inf_3", "inf_4"}));
  EXPECT_EQ(d.ids.front(), "s00000");
  EXPECT_EQ(d.comments.size(), 7u);
}

TEST(Synth, BitwiseDeterministicCsv) {
  EXPECT_EQ(dataset_to_csv(synth_generate({})), dataset_to_csv(synth_generate({})));
  SynthConfig other;
  other.seed = 43;
  EXPECT_NE(dataset_to_csv(synth_generate({})), dataset_to_csv(synth_generate(other)));
}

TEST(Synth, InformativeShiftIsVisible) {
  const Dataset d = synth_generate({});
  double m1 = 0, m0 = 0, n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    (d.labels[i] == 1.0 ? m1 : m0) += d.features(i, 2);
    (d.labels[i] == 1.0 ? n1 : n0) += 1;
  }
  EXPECT_NEAR(m1 / n1 - m0 / n0, 0.8, 0.15);
}

TEST(Synth, NullTaskIsChance) {
  SynthConfig sc;
  sc.informative = 0;
  sc.n = 1000;
  const Dataset d = synth_generate(sc);
  CvConfig cv;
  cv.train.epochs = 40;
  cv.parallel = false;
  const CvResult r = cross_validate(d, ModelSpec{ModelKind::Logistic, {}}, cv);
  EXPECT_NEAR(*summarize(r).accuracy.mean, 0.5, 0.06);
}

TEST(Synth, DegenerateSizes) {
  SynthConfig sc;
  sc.n = 50;
  EXPECT_THROW(synth_generate(sc), PreconditionError);
  sc.n = 200;
  sc.informative = sc.nuisance = 0;
  EXPECT_THROW(synth_generate(sc), PreconditionError);
}

TEST(EmbedStub, DeterministicLengthRange) {
  EXPECT_EQ(embed_stub("s00001", 10), embed_stub("s00001", 10));
  EXPECT_EQ(embed_stub("x", 10).size(), 10u);
  EXPECT_TRUE(embed_stub("x", 0).empty());
  for (double v : embed_stub("abc", 64)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(EmbedStub, DistinctIdsDiffer) {
  std::set<std::vector<double>> seen;
  for (int i = 0; i < 5000; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%05d", i);
    seen.insert(embed_stub(id, 10));
  }
  EXPECT_EQ(seen.size(), 5000u);
}

// --- experiments -------------------------------------------------------------

Dataset small_task() {
  SynthConfig sc;
  sc.n = 200;
  return synth_generate(sc);
}

CvConfig quick_cv(bool parallel) {
  CvConfig cv;
  cv.train.epochs = 4;
  cv.train.batch_size = 32;
  cv.parallel = parallel;
  return cv;
}

TEST(CrossValidate, ParallelMatchesSerialBitwise) {
  const Dataset d = small_task();
  const ModelSpec spec;
  EXPECT_EQ(metrics_csv(cross_validate(d, spec, quick_cv(true))), metrics_csv(cross_validate(d, spec, quick_cv(false))));
}

TEST(CrossValidate, TrainFoldFeaturesInUnitRange) {
  const Dataset d = small_task();
  const FoldSplit s = kfold_split(d.size(), 5, 42);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto rows = training_rows(s, k);
    const Dataset n = normalize(d, NormPolicy::TrainFold, rows).first;
    for (std::size_t r : rows)
      for (double v : n.features.row(r)) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
  }
}

TEST(CrossValidate, SummaryUsesSampleStd) {
  CvResult r;
  for (std::size_t tp : {6u, 8u, 10u}) {
    FoldOutcome f;
    f.metrics = metrics_from_confusion({tp, 0, 0, 10 - tp});
    r.folds.push_back(std::move(f));
  }
  const CvSummary s = summarize(r);
  EXPECT_NEAR(*s.accuracy.mean, 0.8, 1e-15);
  EXPECT_NEAR(*s.accuracy.std, 0.2, 1e-15);
  EXPECT_NEAR(*s.recall.std, 0.2, 1e-15);
  EXPECT_FALSE(s.specificity.mean.has_value());
  EXPECT_EQ(metrics_csv(r).find("nan"), std::string::npos);
}

TEST(RunDirectory, ArtifactsAndNoOverwrite) {
  const Dataset d = small_task();
  const CvResult r = cross_validate(d, ModelSpec{}, quick_cv(true));
  const auto dir = fresh_path("run");
  write_run_directory(dir, r, d, {{"seed", "42"}});
  for (const char* f : {"metrics.csv", "history.csv", "attention.csv", "manifest.txt", "fold0.ckpt", "fold4.ckpt",
                        "fold0.norm.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const CsvTable m = read_csv(dir / "metrics.csv");
  ASSERT_EQ(m.rows.size(), 7u);
  EXPECT_EQ(m.rows[5][0], "mean");
  EXPECT_EQ(m.rows[6][0], "std");
  EXPECT_NE(slurp(dir / "manifest.txt").find("seed=42"), std::string::npos);

  const SelectorNet net = load_checkpoint(dir / "fold2.ckpt");
  const auto* trained = dynamic_cast<const SelectorNetClassifier*>(r.folds[2].training.model.get());
  ASSERT_NE(trained, nullptr);
  const Dataset test = normalize(d, NormPolicy::TrainFold, training_rows(r.split, 2)).first.subset(r.split[2]);
  EXPECT_EQ(net.predict(test.features, test.embeddings).prob,
            trained->net().predict(test.features, test.embeddings).prob);

  EXPECT_THROW(write_run_directory(dir, r, d, {}), DataError);
}

TEST(RunDirectory, LogisticHasNoCheckpointOrAttention) {
  const Dataset d = small_task();
  const CvResult r = cross_validate(d, ModelSpec{ModelKind::Logistic, {}}, quick_cv(false));
  const auto dir = fresh_path("run_logistic");
  write_run_directory(dir, r, d, {});
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "fold0.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "attention.csv"));
}

TEST(Ablation, VariantListAndTable) {
  const auto variants = ablation_variants();
  ASSERT_EQ(variants.size(), 8u);
  EXPECT_EQ(variants[0].name, "full");
  std::set<std::string> names;
  for (const auto& v : variants) names.insert(v.name);
  EXPECT_EQ(names.size(), 8u);

  const Dataset d = small_task();
  CvConfig cv = quick_cv(true);
  cv.train.epochs = 2;
  const auto rows = run_ablation(d, variants, cv);
  ASSERT_EQ(rows.size(), 8u);
  const CsvTable t = parse_csv(ablation_csv(rows), "m");
  EXPECT_EQ(t.rows.size(), 8u);
  for (const auto& row : t.rows) {
    for (const auto& c : row) EXPECT_EQ(c.find("nan"), std::string::npos);
  }
}

TEST(Noise, AppendNoiseShape) {
  const Dataset d = small_task();
  const Dataset n = append_noise(d, 30, 1);
  EXPECT_EQ(n.schema.size(), 50u);
  EXPECT_EQ(n.schema.name(20), "noise_0");
  EXPECT_EQ(n.schema.name(49), "noise_29");
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(n.features(i, j), d.features(i, j));
    for (std::size_t j = 20; j < 50; ++j) {
      EXPECT_GE(n.features(i, j), 0.0);
      EXPECT_LT(n.features(i, j), 1.0);
    }
  }
  EXPECT_EQ(append_noise(d, 0, 1).features, d.features);
}

TEST(Noise, ReportHasOneColumnPerFeature) {
  const Dataset d = small_task();
  NoiseConfig nc;
  nc.train.epochs = 3;
  nc.train.batch_size = 32;
  const NoiseReport r = noise_experiment(d, nc);
  EXPECT_EQ(r.attention.size(), 50u);
  EXPECT_EQ(r.noise.size(), 30u);
  EXPECT_EQ(r.informative.size(), 5u);
  EXPECT_TRUE(r.ratio.has_value());
  const auto p = fresh_path("noise.csv");
  write_noise_report(r, p);
  EXPECT_EQ(read_csv(p).rows.size(), 50u);
}

TEST(Noise, ZeroNoiseEqualsPlainAttention) {
  const Dataset d = small_task();
  NoiseConfig nc;
  nc.n_noise = 0;
  nc.train.epochs = 3;
  nc.train.batch_size = 32;
  const NoiseReport r = noise_experiment(d, nc);
  EXPECT_EQ(r.attention.size(), 20u);
  EXPECT_FALSE(r.ratio.has_value());
  EXPECT_EQ(r.names, d.schema.names());
}

// --- extraction workflow -----------------------------------------------------

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::filesystem::path extract_fixture() {
  const auto root = fresh_path("extract");
  std::filesystem::create_directories(root / "img");
  std::filesystem::create_directories(root / "mask");
  Rng rng(5);
  for (const char* id : {"p1", "p2"}) {
    tongue::RgbImage img(24, 20);
    tongue::Mask mask(24, 20);
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 0; x < 24; ++x) {
        const bool coat = y >= 8 && y < 12;
        img.set(x, y,
                {static_cast<std::uint8_t>(coat ? 160 : 200 + rng.below(40)),
                 static_cast<std::uint8_t>(coat ? 130 : 70 + rng.below(30)),
                 static_cast<std::uint8_t>(coat ? 120 : 70 + rng.below(30))});
        mask.set(x, y, x >= 2 && x < 22 && y >= 2 && y < 18);
      }
    tongue::write_rgb_png(img, root / "img" / (std::string(id) + ".png"));
    tongue::write_mask_png(mask, root / "mask" / (std::string(id) + ".png"));
  }
  write_text(root / "physio.csv",
             "id,Gender,Age,Height,Weight,Waist Circumference,Hip Circumference,label\n"
             "p1,M,45,170,68,80,100,1\n"
             "p2,female,38,160,55,70,95,0\n");
  write_text(root / "det.csv", "image_id,class,x_min,y_min,x_max,y_max\np1,crack,2,2,6,6\np1,spot,10,10,12,12\n");
  return root;
}

TEST(Extract, WritesSchemaRowsWithEmbeddings) {
  const auto root = extract_fixture();
  ExtractPaths paths{root / "img", root / "mask", root / "physio.csv", root / "det.csv", root / "features.csv", 10};
  const ExtractSummary s = run_extract(paths);
  EXPECT_EQ(s.rows, 2u);
  const Dataset d = load_dataset(root / "features.csv", tongue::tongue_schema());
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.schema.size(), 52u);
  EXPECT_EQ(d.embed_dim(), 10u);
  EXPECT_EQ(d.labels, (std::vector<double>{1, 0}));
  EXPECT_EQ(d.features(0, 0), 1.0);
  EXPECT_EQ(d.features(1, 0), 0.0);
  const auto crack = *d.schema.index_of("crack_count");
  EXPECT_EQ(d.features(0, crack), 1.0);
  EXPECT_EQ(d.features(1, crack), 0.0);
  const auto emb = embed_stub("p2", 10);
  for (std::size_t e = 0; e < 10; ++e) EXPECT_EQ(d.embeddings(1, e), emb[e]);
  EXPECT_TRUE(std::filesystem::exists(root / "features.csv.flags.csv"));

  const std::string first = slurp(root / "features.csv");
  run_extract(paths);
  EXPECT_EQ(slurp(root / "features.csv"), first);
}

TEST(Extract, MissingImageAndIndicatorAreDataErrors) {
  const auto root = extract_fixture();
  ExtractPaths paths{root / "img", root / "mask", root / "physio.csv", std::nullopt, root / "f.csv", 10};
  std::filesystem::remove(root / "img" / "p2.png");
  EXPECT_THROW(run_extract(paths), DataError);
  tongue::write_rgb_png(tongue::RgbImage(24, 20), root / "img" / "p2.png");
  write_text(root / "physio.csv",
             "id,Gender,Age,Height,Weight,Waist Circumference\np1,M,45,170,68,80\n");
  const std::string msg = error_message([&] { run_extract(paths); });
  EXPECT_NE(msg.find("Hip Circumference"), std::string::npos) << msg;
}

}  // namespace
}  // namespace selnet::pipeline
