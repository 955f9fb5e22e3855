// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "selnet/attention.hpp"
#include "selnet/checkpoint.hpp"
#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"
#include "selnet/pipeline/experiment.hpp"
#include "selnet/pipeline/extract.hpp"
#include "selnet/pipeline/synth.hpp"

namespace selnet::cli {

namespace {

using namespace selnet::pipeline;

constexpr std::uint64_t kDefaultSeed = 42;
const std::string kSeedHelp = "Random seed (default: $SELNET_SEED if set, else 42)";

// Thrown for option values that parse but make no sense together.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SELNET_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError("SELNET_SEED must be a non-negative integer, got '" + std::string(env) + "'");
    return v;
  }
  return kDefaultSeed;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

struct NetOptions {
  std::size_t steps = 3;
  std::string selector = "full";
  std::string fab = "attention";
  std::string resblock = "residual";
  std::string fab_step = "raw";
  std::string variant;

  void add(CLI::App& app) {
    app.add_option("--steps", steps, "SelectorNet steps")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--selector", selector, "Selector variant")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "stage1_only", "stage2_only", "concat", "add", "hadamard"}));
    app.add_option("--fab", fab, "Fusion attention block variant")
        ->capture_default_str()
        ->check(CLI::IsMember({"attention", "concat_linear_relu"}));
    app.add_option("--resblock", resblock, "ResBlock variant")
        ->capture_default_str()
        ->check(CLI::IsMember({"residual", "linear_relu"}));
    app.add_option("--fab-step", fab_step, "Step message fed to the fusion block: raw x_step or processed S2")
        ->capture_default_str()
        ->check(CLI::IsMember({"raw", "processed"}));
    std::vector<std::string> names;
    for (const auto& v : ablation_variants()) names.push_back(v.name);
    app.add_option("--variant", variant,
                   "Ablation row to train; overrides --selector/--fab/--resblock (default: none)")
        ->check(CLI::IsMember(names));
  }

  SelectorNetConfig config() const {
    SelectorNetConfig c;
    c.steps = steps;
    c.selector_variant = parse_selector_variant(selector);
    c.fab_variant = parse_fab_variant(fab);
    c.resblock_variant = parse_resblock_variant(resblock);
    c.fab_step_input = parse_fab_step_input(fab_step);
    if (!variant.empty()) {
      for (const auto& v : ablation_variants(c)) {
        if (v.name == variant) return v.net;
      }
    }
    return c;
  }
};

struct TrainOptions {
  double lr = 0.4637;
  std::size_t epochs = 584;
  std::size_t batch_size = 128;
  std::size_t patience = 50;
  double threshold = 0.5;

  void add(CLI::App& app) {
    app.add_option("--lr", lr, "Base learning rate (cosine annealed)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app.add_option("--batch-size", batch_size, "Minibatch size")->capture_default_str()->check(CLI::Range(2, 1 << 30));
    app.add_option("--patience", patience, "Early-stopping patience in epochs, 0 disables")->capture_default_str();
    app.add_option("--threshold", threshold, "Decision threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig t;
    t.lr = lr;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.patience = patience;
    t.threshold = threshold;
    t.seed = seed;
    return t;
  }
};

std::vector<std::pair<std::string, std::string>> manifest_for(const std::string& command, const std::string& data,
                                                              const SelectorNetConfig& net, const TrainConfig& t,
                                                              const CvConfig& cv, const std::string& model) {
  return {{"command", command},
          {"data", data},
          {"model", model},
          {"seed", std::to_string(cv.seed)},
          {"folds", std::to_string(cv.folds)},
          {"fold_seed_rule", "seed+fold"},
          {"norm", std::string(to_string(cv.norm))},
          {"inner_val_fraction", format_double(cv.inner_val_fraction)},
          {"parallel", cv.parallel ? "true" : "false"},
          {"lr", format_double(t.lr)},
          {"epochs", std::to_string(t.epochs)},
          {"batch_size", std::to_string(t.batch_size)},
          {"patience", std::to_string(t.patience)},
          {"threshold", format_double(t.threshold)},
          {"steps", std::to_string(net.steps)},
          {"selector", std::string(to_string(net.selector_variant))},
          {"fab", std::string(to_string(net.fab_variant))},
          {"resblock", std::string(to_string(net.resblock_variant))},
          {"fab_step", std::string(to_string(net.fab_step_input))}};
}

std::string metric_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

// Loads data for a saved model and applies the fold's normalization sidecar.
Dataset load_for_checkpoint(const std::string& data_path, const std::string& ckpt, std::string norm_path, bool raw) {
  Dataset d = load_dataset(data_path);
  if (raw) return d;
  if (norm_path.empty()) {
    std::filesystem::path p(ckpt);
    norm_path = (p.parent_path() / (p.stem().string() + ".norm.csv")).string();
  }
  if (!std::filesystem::exists(norm_path)) {
    throw DataError("normalization statistics " + norm_path + " not found; pass --norm-stats or --raw");
  }
  d.features = apply_norm(read_norm_stats(norm_path, d.schema), d.features);
  return d;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SelectorNet tabular diagnosis toolkit", "selnet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::optional<std::uint64_t> seed_flag;
  bool single_thread = false;

  // extract
  auto* extract = app.add_subcommand("extract", "Tongue images, masks and physiological records to a feature CSV");
  ExtractPaths ep;
  std::string images, masks, physio, detections, extract_out, aspect = "height_over_width";
  std::size_t glcm_levels = 64;
  extract->add_option("--images", images, "Directory of <id>.png/.jpg images")->required();
  extract->add_option("--masks", masks, "Directory of <id>.png tongue masks")->required();
  extract->add_option("--physio", physio, "Physiological CSV with an id column")->required();
  extract->add_option("--detections", detections, "Detection CSV: image_id,class,x_min,y_min,x_max,y_max (optional)");
  extract->add_option("--out", extract_out, "Output feature CSV")->required();
  extract->add_option("--embed-dim", ep.embed_dim, "Stub embedding width")->capture_default_str();
  extract->add_option("--glcm-levels", glcm_levels, "GLCM gray levels")->capture_default_str()->check(CLI::Range(2, 256));
  extract->add_option("--aspect", aspect, "Aspect ratio definition")
      ->capture_default_str()
      ->check(CLI::IsMember({"height_over_width", "width_over_height"}));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted-signal synthetic dataset");
  SynthConfig sc;
  std::string synth_out;
  synth->add_option("--n", sc.n, "Rows")->capture_default_str();
  synth->add_option("--informative", sc.informative, "Informative features")->capture_default_str();
  synth->add_option("--nuisance", sc.nuisance, "Label-independent features")->capture_default_str();
  synth->add_option("--shift", sc.shift, "Class-mean separation in standard deviations")->capture_default_str();
  synth->add_option("--interaction", sc.interaction, "Strength of the inf_0 x inf_1 interaction")->capture_default_str();
  synth->add_option("--embed-dim", sc.embed_dim, "Stub embedding width")->capture_default_str();
  synth->add_option("--seed", seed_flag, kSeedHelp);
  synth->add_option("--out", synth_out, "Output CSV")->required();

  // train
  auto* trainc = app.add_subcommand("train", "K-fold training and evaluation into a new run directory");
  std::string train_data, train_out, norm = "train_fold", model = "selectornet";
  std::size_t folds = 5;
  double inner_val = 0.15;
  NetOptions net_opts;
  TrainOptions train_opts;
  trainc->add_option("--data", train_data, "Dataset CSV")->required();
  trainc->add_option("--out", train_out, "Run directory (must not exist)")->required();
  trainc->add_option("--folds", folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
  trainc->add_option("--norm", norm, "Min-max statistics from the training fold or from all rows")
      ->capture_default_str()
      ->check(CLI::IsMember({"global", "train_fold"}));
  trainc->add_option("--model", model, "Model")->capture_default_str()->check(CLI::IsMember({"selectornet", "logistic"}));
  trainc->add_option("--inner-val", inner_val, "Share of training rows held out for early stopping")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  trainc->add_option("--seed", seed_flag, kSeedHelp);
  trainc->add_flag("--single-thread", single_thread, "Train folds one after another");
  net_opts.add(*trainc);
  train_opts.add(*trainc);

  // eval / explain
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  auto* explain = app.add_subcommand("explain", "Per-sample attention of a checkpoint on a dataset");
  std::string ck_path, ck_data, ck_out, norm_stats;
  bool raw = false;
  double eval_threshold = 0.5;
  for (auto* sub : {eval, explain}) {
    sub->add_option("--checkpoint", ck_path, "Checkpoint file")->required();
    sub->add_option("--data", ck_data, "Dataset CSV")->required();
    sub->add_option("--out", ck_out, sub == eval ? "Metrics CSV" : "Attention CSV")->required();
    sub->add_option("--norm-stats", norm_stats, "Normalization sidecar (default: <checkpoint stem>.norm.csv)");
    sub->add_flag("--raw", raw, "Data is already normalized");
  }
  eval->add_option("--threshold", eval_threshold, "Decision threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Cross-validate every ablation variant and write one comparison table");
  std::string ab_data, ab_out, ab_norm = "train_fold";
  std::size_t ab_folds = 5;
  NetOptions ab_net;
  TrainOptions ab_train;
  ablate->add_option("--data", ab_data, "Dataset CSV")->required();
  ablate->add_option("--out", ab_out, "Comparison CSV")->required();
  ablate->add_option("--folds", ab_folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
  ablate->add_option("--norm", ab_norm, "Normalization policy")
      ->capture_default_str()
      ->check(CLI::IsMember({"global", "train_fold"}));
  ablate->add_option("--seed", seed_flag, kSeedHelp);
  ablate->add_flag("--single-thread", single_thread, "Train folds one after another");
  ablate->add_option("--steps", ab_net.steps, "SelectorNet steps")->capture_default_str()->check(CLI::PositiveNumber);
  ab_train.add(*ablate);

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Append random features, retrain and report attention");
  std::string pt_data, pt_out, pt_norm = "train_fold", pt_inf;
  NoiseConfig nc;
  NetOptions pt_net;
  TrainOptions pt_train;
  perturb->add_option("--data", pt_data, "Dataset CSV")->required();
  perturb->add_option("--out", pt_out, "Attention report CSV")->required();
  perturb->add_option("--noise", nc.n_noise, "Uniform [0,1) noise features to append")->capture_default_str();
  perturb->add_option("--val-fraction", nc.val_fraction, "Validation share")
      ->capture_default_str()
      ->check(CLI::Range(0.01, 0.99));
  perturb->add_option("--informative", pt_inf,
                      "Comma-separated informative features (default: inf_* columns, else all original)");
  perturb->add_option("--norm", pt_norm, "Normalization policy")
      ->capture_default_str()
      ->check(CLI::IsMember({"global", "train_fold"}));
  perturb->add_option("--seed", seed_flag, kSeedHelp);
  pt_net.add(*perturb);
  pt_train.add(*perturb);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::uint64_t seed = resolve_seed(seed_flag);

    if (extract->parsed()) {
      ep.image_dir = images;
      ep.mask_dir = masks;
      ep.physio_csv = physio;
      if (!detections.empty()) ep.detections_csv = detections;
      ep.out = extract_out;
      tongue::ExtractionConfig ec;
      ec.glcm.levels = static_cast<int>(glcm_levels);
      ec.aspect = aspect == "height_over_width" ? tongue::AspectDefinition::HeightOverWidth
                                                : tongue::AspectDefinition::WidthOverHeight;
      const ExtractSummary s = run_extract(ep, ec);
      err << "extracted " << s.rows << " rows (" << s.flagged_rows << " with fallback flags)\n";
    } else if (synth->parsed()) {
      sc.seed = seed;
      write_dataset(synth_generate(sc), synth_out);
    } else if (trainc->parsed()) {
      if (std::filesystem::exists(train_out)) {
        throw DataError("run directory " + train_out + " already exists; choose a new --out");
      }
      const Dataset d = load_dataset(train_data);
      CvConfig cv;
      cv.folds = folds;
      cv.seed = seed;
      cv.norm = parse_norm_policy(norm);
      cv.inner_val_fraction = inner_val;
      cv.parallel = !single_thread;
      cv.train = train_opts.config(seed);
      ModelSpec spec{model == "logistic" ? ModelKind::Logistic : ModelKind::SelectorNet, net_opts.config()};
      const CvResult r = cross_validate(d, spec, cv);
      std::string command = "selnet";
      for (const auto& a : args) command += " " + a;
      write_run_directory(train_out, r, d, manifest_for(command, train_data, spec.net, cv.train, cv, model));
      for (const auto& f : r.folds) {
        err << "fold " << f.fold << ": accuracy " << format_double(f.metrics.accuracy) << ", epochs "
            << f.training.history.size() << "\n";
      }
      const CvSummary s = summarize(r);
      err << "mean accuracy " << metric_cell(s.accuracy.mean) << " +/- " << metric_cell(s.accuracy.std)
          << " (sample std)\n";
    } else if (eval->parsed() || explain->parsed()) {
      const SelectorNet net = load_checkpoint(ck_path);
      const Dataset d = load_for_checkpoint(ck_data, ck_path, norm_stats, raw);
      const ForwardResult fr = net.predict(d.features, d.embeddings);
      if (eval->parsed()) {
        const Metrics m = evaluate_predictions(fr.prob, d.labels, eval_threshold);
        std::ostringstream csv;
        write_csv_row(csv, {"n", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "specificity"});
        const Confusion& c = m.confusion;
        write_csv_row(csv, {std::to_string(c.total()), std::to_string(c.tp), std::to_string(c.tn), std::to_string(c.fp),
                            std::to_string(c.fn), format_double(m.accuracy), metric_cell(m.precision),
                            metric_cell(m.recall), metric_cell(m.specificity)});
        write_file(ck_out, csv.str());
      } else {
        write_attention_csv(attention(fr.traces, d.schema.names()), ck_out);
      }
    } else if (ablate->parsed()) {
      const Dataset d = load_dataset(ab_data);
      CvConfig cv;
      cv.folds = ab_folds;
      cv.seed = seed;
      cv.norm = parse_norm_policy(ab_norm);
      cv.parallel = !single_thread;
      cv.train = ab_train.config(seed);
      const auto rows = run_ablation(d, ablation_variants(ab_net.config()), cv);
      write_file(ab_out, ablation_csv(rows));
      for (const auto& r : rows) {
        err << r.name << ": accuracy " << metric_cell(r.summary.accuracy.mean) << (r.complete ? "" : " (incomplete)")
            << "\n";
      }
    } else if (perturb->parsed()) {
      const Dataset d = load_dataset(pt_data);
      nc.seed = seed;
      nc.norm = parse_norm_policy(pt_norm);
      nc.net = pt_net.config();
      nc.train = pt_train.config(seed);
      std::stringstream names(pt_inf);
      for (std::string name; std::getline(names, name, ',');) {
        if (!name.empty()) nc.informative.push_back(name);
      }
      const NoiseReport r = noise_experiment(d, nc);
      write_noise_report(r, pt_out);
      err << "informative/noise attention ratio " << metric_cell(r.ratio) << ", top feature " << r.top_feature
          << ", validation accuracy " << format_double(r.val_metrics.accuracy) << "\n";
    }
  } catch (const UsageError& e) {
    err << "selnet: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "selnet: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace selnet::cli
