// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.
//
// The `ccpv` command ties the pipeline together: prepare-data -> train ->
// eval -> plot-roc, plus enroll/verify against a persistent gallery.
// Machine-readable JSON goes to stdout, diagnostics and progress to stderr;
// exit codes map 1:1 onto the library's error classes (usage errors are 2).

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ccpv/common.hpp"
#include "ccpv/datasets.hpp"
#include "ccpv/image.hpp"
#include "ccpv/matching.hpp"
#include "ccpv/metrics.hpp"
#include "ccpv/model.hpp"
#include "ccpv/training.hpp"
#include "ccpv/transforms.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

int exit_code_for(ccpv::ErrorCode code) {
  if (code == ccpv::ErrorCode::Usage) return 2;
  return 10 + static_cast<int>(code);
}

void emit(const json& doc) { std::cout << doc.dump(2) << std::endl; }

ccpv::AggregateRule parse_rule(const std::string& token) {
  if (token == "mean4") return ccpv::AggregateRule::Mean4;
  if (token == "competition") return ccpv::AggregateRule::Competition;
  if (token == "single") return ccpv::AggregateRule::Single;
  ccpv::raise(ccpv::ErrorCode::Usage,
              "unknown rule '" + token + "' (mean4|competition|single)");
}

ccpv::PairingMode parse_pairing(const std::string& token) {
  if (token == "cross") return ccpv::PairingMode::CrossProduct;
  if (token == "aswritten") return ccpv::PairingMode::AsWritten;
  ccpv::raise(ccpv::ErrorCode::Usage,
              "unknown pairing '" + token + "' (cross|aswritten)");
}

// Protocol tokens may contain ':'; keep artifact names filesystem-friendly.
std::string sanitize(const std::string& token) {
  std::string out = token;
  std::replace(out.begin(), out.end(), ':', '-');
  return out;
}

struct PrepareArgs {
  bool synthetic = false;
  std::string manifest;
  int identities = 10;
  int images_per_palm = 6;
  int side = 128;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  int train_left = 4;
  int train_right = 4;
  std::string out;
};

int cmd_prepare_data(const PrepareArgs& args) {
  if (args.synthetic == !args.manifest.empty())
    ccpv::raise(ccpv::ErrorCode::Usage,
                "pass exactly one of --synthetic or --manifest");
  fs::create_directories(args.out);

  ccpv::DatasetManifest manifest;
  if (args.synthetic) {
    ccpv::SynthSpec spec;
    spec.n_identities = args.identities;
    spec.images_per_palm = args.images_per_palm;
    spec.side = args.side;
    spec.noise_sigma = args.noise_sigma;
    spec.seed = args.seed;
    manifest = ccpv::generate_synthetic_dataset(spec, args.out);
    std::cerr << "generated " << manifest.samples.size() << " images for "
              << args.identities << " identities under " << args.out << "\n";
  } else {
    manifest = ccpv::load_manifest(args.manifest);
  }

  ccpv::SplitSpec split;
  split.train_left = args.train_left;
  split.train_right = args.train_right;
  split.seed = args.seed;
  const ccpv::SplitResult splits = ccpv::build_splits(manifest, split);

  const std::string train_csv = (fs::path(args.out) / "train.csv").string();
  const std::string test_csv = (fs::path(args.out) / "test.csv").string();
  ccpv::save_manifest(splits.train, train_csv);
  ccpv::save_manifest(splits.test, test_csv);

  json doc;
  doc["out"] = args.out;
  if (args.synthetic) doc["images"] = (fs::path(args.out) / "images").string();
  doc["train_manifest"] = train_csv;
  doc["test_manifest"] = test_csv;
  doc["identities"] = manifest.identities().size();
  doc["train_samples"] = splits.train.samples.size();
  doc["test_samples"] = splits.test.samples.size();
  emit(doc);
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out = "model.ckpt";
  std::string log = "train_log.csv";
  std::optional<std::string> framework;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> batch_identities;
  std::optional<double> learning_rate;
  std::optional<double> tau;
  std::optional<double> beta;
  std::optional<double> w_ce;
  std::optional<double> w_cc;
  std::optional<std::string> arch;
  std::optional<int> embedding_dim;
  std::optional<int> image_side;
  std::optional<std::string> channels;
  std::optional<bool> ce_on_all_views;
  std::optional<bool> as_written;
  std::optional<std::string> traditional_side;
  std::optional<bool> standardize;
};

int cmd_train(const TrainArgs& args) {
  ccpv::TrainConfig config;
  if (!args.config.empty()) config = ccpv::load_train_config(args.config);
  if (args.framework) config.framework = ccpv::parse_framework(*args.framework);
  if (args.seed) config.seed = *args.seed;
  if (args.epochs) config.epochs = *args.epochs;
  if (args.batch_identities) config.batch_identities = *args.batch_identities;
  if (args.learning_rate) config.learning_rate = *args.learning_rate;
  if (args.tau) config.tau = *args.tau;
  if (args.beta) config.beta = *args.beta;
  if (args.w_ce) config.weights.w_ce = *args.w_ce;
  if (args.w_cc) config.weights.w_cc = *args.w_cc;
  if (args.arch) config.backbone.arch = *args.arch;
  if (args.embedding_dim) config.backbone.embedding_dim = *args.embedding_dim;
  if (args.image_side) config.backbone.image_side = *args.image_side;
  if (args.channels) config.backbone.params["channels"] = *args.channels;
  if (args.ce_on_all_views) config.ce_on_all_views = *args.ce_on_all_views;
  if (args.as_written) config.as_written_denominator = *args.as_written;
  if (args.traditional_side)
    config.traditional_chirality = ccpv::parse_chirality(*args.traditional_side);
  if (args.standardize) config.standardize = *args.standardize;

  const ccpv::DatasetManifest train_set = ccpv::load_manifest(args.data);
  std::cerr << "training " << ccpv::framework_token(config.framework) << " on "
            << train_set.samples.size() << " samples / "
            << train_set.identities().size() << " identities, " << config.epochs
            << " epochs\n";

  const ccpv::TrainArtifacts artifacts =
      ccpv::train(config, train_set, args.out, args.log);
  for (const ccpv::EpochStats& e : artifacts.report.epochs) {
    if (e.epoch % 10 == 0 || e.epoch == 1 ||
        e.epoch == static_cast<int>(artifacts.report.epochs.size()))
      std::cerr << "epoch " << e.epoch << ": l_ce=" << e.l_ce
                << " l_cc=" << e.l_cc << " total=" << e.total << "\n";
  }

  json doc;
  doc["checkpoint"] = args.out;
  doc["log"] = args.log;
  doc["framework"] = ccpv::framework_token(config.framework);
  doc["classes"] = artifacts.class_vocab.size();
  doc["epochs"] = artifacts.report.epochs.size();
  const ccpv::EpochStats& last = artifacts.report.epochs.back();
  doc["final_l_ce"] = last.l_ce;
  doc["final_l_cc"] = last.l_cc;
  doc["final_total"] = last.total;
  doc["wall_seconds"] = artifacts.report.wall_seconds;
  emit(doc);
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string protocols = "all";
  std::string out_dir = ".";
  std::optional<std::string> rule;
  std::string pairing = "cross";
  std::size_t roc_points = 0;
  std::vector<double> far_targets;
};

int cmd_eval(const EvalArgs& args) {
  const ccpv::Checkpoint checkpoint = ccpv::load_checkpoint(args.checkpoint);
  const ccpv::DatasetManifest test_set = ccpv::load_manifest(args.data);

  std::vector<std::string> warnings;
  const std::vector<std::string> tokens =
      ccpv::expand_protocols(args.protocols, test_set, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  ccpv::EvalOptions options;
  if (args.rule) options.rule = parse_rule(*args.rule);
  options.pairing = parse_pairing(args.pairing);
  options.roc_points = args.roc_points;
  if (!args.far_targets.empty()) options.far_targets = args.far_targets;

  const std::vector<ccpv::EvalResult> results =
      ccpv::evaluate(checkpoint, test_set, tokens, options);

  fs::create_directories(args.out_dir);
  json reports = json::array();
  for (const ccpv::EvalResult& result : results) {
    const std::string stem = sanitize(result.protocol);
    const fs::path dir(args.out_dir);
    ccpv::save_report(result.report, (dir / ("report_" + stem + ".json")).string());
    ccpv::save_roc_csv(result.curve, (dir / ("roc_" + stem + ".csv")).string());
    ccpv::save_scores_csv(result.scores,
                          (dir / ("scores_" + stem + ".csv")).string());
    reports.push_back(json::parse(ccpv::report_to_json(result.report)));
    std::cerr << result.protocol << ": EER " << result.report.eer * 100.0
              << "% @ " << result.report.threshold << ", ACC "
              << result.report.acc * 100.0 << "% (" << result.report.n_genuine
              << " genuine / " << result.report.n_impostor << " impostor)\n";
  }
  emit(reports);
  return 0;
}

// Shared by enroll/verify: the checkpoint dictates preprocessing, and an
// LRPR-trained model sees right palms flipped to left orientation.
ccpv::ImageArray load_view(const ccpv::Checkpoint& checkpoint,
                           const ccpv::TrainConfig& config,
                           const std::string& image_path,
                           const std::optional<ccpv::Chirality>& side) {
  ccpv::PreprocessOptions options;
  options.target_side = checkpoint.backbone.image_side;
  options.standardize = config.standardize;
  ccpv::ImageArray image = ccpv::preprocess(ccpv::load_png(image_path), options);
  if (config.framework == ccpv::Framework::LRPR && side &&
      *side == ccpv::Chirality::Right)
    return ccpv::flip(image);
  return image;
}

struct EnrollArgs {
  std::string gallery;
  std::string checkpoint;
  std::string image;
  std::string identity;
  std::optional<std::string> side;
  bool overwrite = false;
};

int cmd_enroll(const EnrollArgs& args) {
  const ccpv::Checkpoint checkpoint = ccpv::load_checkpoint(args.checkpoint);
  const ccpv::TrainConfig config = ccpv::config_from_checkpoint(checkpoint);
  std::unique_ptr<ccpv::Backbone> model = ccpv::restore_backbone(checkpoint);

  std::optional<ccpv::Chirality> side;
  if (args.side) side = ccpv::parse_chirality(*args.side);

  ccpv::GalleryStore store = fs::exists(args.gallery)
                                 ? ccpv::GalleryStore::load(args.gallery)
                                 : ccpv::GalleryStore(config.beta);
  store.enroll(args.identity, load_view(checkpoint, config, args.image, side),
               *model, args.overwrite, side);
  store.save(args.gallery);

  json doc;
  doc["gallery"] = args.gallery;
  doc["identity"] = args.identity;
  doc["entries"] = store.entries().size();
  doc["dim"] = store.dim();
  emit(doc);
  return 0;
}

struct VerifyArgs {
  std::string gallery;
  std::string checkpoint;
  std::string image;
  std::string identity;
  double threshold = 0.0;
  std::optional<std::string> rule;
  std::string pairing = "cross";
  std::optional<std::string> side;
};

int cmd_verify(const VerifyArgs& args) {
  const ccpv::Checkpoint checkpoint = ccpv::load_checkpoint(args.checkpoint);
  const ccpv::TrainConfig config = ccpv::config_from_checkpoint(checkpoint);
  std::unique_ptr<ccpv::Backbone> model = ccpv::restore_backbone(checkpoint);

  std::optional<ccpv::Chirality> side;
  if (args.side) side = ccpv::parse_chirality(*args.side);
  const ccpv::AggregateRule rule = args.rule
                                       ? parse_rule(*args.rule)
                                       : ccpv::default_rule(config.framework);

  const ccpv::GalleryStore store = ccpv::GalleryStore::load(args.gallery);
  const ccpv::VerifyOutcome outcome = store.verify(
      args.identity, load_view(checkpoint, config, args.image, side), *model,
      args.threshold, parse_pairing(args.pairing), rule);

  json doc;
  doc["accept"] = outcome.accept;
  doc["aggregate"] = outcome.match.aggregate;
  doc["d1"] = outcome.match.d[0];
  doc["d2"] = outcome.match.d[1];
  doc["d3"] = outcome.match.d[2];
  doc["d4"] = outcome.match.d[3];
  doc["threshold"] = outcome.threshold;
  emit(doc);
  return 0;
}

struct PlotArgs {
  std::vector<std::string> csvs;
  std::string out;
  std::string title = "ROC";
};

const char* kPalette[] = {"#3b6ea5", "#c23b22", "#2e8b57",
                          "#d2691e", "#6a3d9a", "#008080"};

std::string render_roc_svg(
    const std::vector<std::pair<std::string, ccpv::RocCurve>>& curves,
    const std::string& title) {
  const double width = 720, height = 520;
  const double left = 80, right = 30, top = 48, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double min_far = 1.0;
  for (const auto& [name, curve] : curves)
    for (const ccpv::RocPoint& p : curve.points)
      if (p.far > 0.0) min_far = std::min(min_far, p.far);
  // Left edge at the decade below the smallest positive FAR; zero-FAR
  // points are clamped onto it.
  int min_exp = static_cast<int>(std::floor(std::log10(min_far)));
  min_exp = std::min(-1, std::max(-8, min_exp));

  const auto x_of = [&](double far) {
    const double clamped = std::max(far, std::pow(10.0, min_exp));
    return left + (std::log10(clamped) - min_exp) / (0.0 - min_exp) * plot_w;
  };
  const auto y_of = [&](double gar) { return top + (1.0 - gar) * plot_h; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' viewBox='0 0 " << width << " " << height
      << "'>\n";
  svg << "<rect width='" << width << "' height='" << height
      << "' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='26' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";

  for (int e = min_exp; e <= 0; ++e) {
    const double x = x_of(std::pow(10.0, e));
    svg << "<line x1='" << x << "' y1='" << top << "' x2='" << x << "' y2='"
        << top + plot_h << "' stroke='#dddddd'/>\n";
    svg << "<text x='" << x << "' y='" << top + plot_h + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>1e"
        << e << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double gar = i / 5.0;
    const double y = y_of(gar);
    svg << "<line x1='" << left << "' y1='" << y << "' x2='" << left + plot_w
        << "' y2='" << y << "' stroke='#dddddd'/>\n";
    svg << "<text x='" << left - 8 << "' y='" << y + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << gar << "</text>\n";
  }
  svg << "<rect x='" << left << "' y='" << top << "' width='" << plot_w
      << "' height='" << plot_h << "' fill='none' stroke='black'/>\n";
  svg << "<text x='" << left + plot_w / 2 << "' y='" << height - 14
      << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
      << "FAR (log scale)</text>\n";
  svg << "<text x='20' y='" << top + plot_h / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
      << "transform='rotate(-90 20 " << top + plot_h / 2 << ")'>GAR</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, curve] = curves[c];
    svg << "<polyline fill='none' stroke='"
        << kPalette[c % (sizeof kPalette / sizeof kPalette[0])]
        << "' stroke-width='1.8' points='";
    for (const ccpv::RocPoint& p : curve.points)
      svg << x_of(p.far) << "," << y_of(p.gar) << " ";
    svg << "'/>\n";
  }

  // Legend in the lower-right corner, where ROC curves rarely reach.
  const double legend_x = left + plot_w - 190;
  double legend_y = top + plot_h - 16.0 * static_cast<double>(curves.size()) - 12;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const double y = legend_y + 16.0 * static_cast<double>(c);
    svg << "<line x1='" << legend_x << "' y1='" << y << "' x2='"
        << legend_x + 26 << "' y2='" << y << "' stroke='"
        << kPalette[c % (sizeof kPalette / sizeof kPalette[0])]
        << "' stroke-width='1.8'/>\n";
    svg << "<text x='" << legend_x + 32 << "' y='" << y + 4
        << "' font-family='sans-serif' font-size='11'>" << curves[c].first
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_plot_roc(const PlotArgs& args) {
  std::vector<std::pair<std::string, ccpv::RocCurve>> curves;
  curves.reserve(args.csvs.size());
  for (const std::string& csv : args.csvs)
    curves.emplace_back(fs::path(csv).stem().string(), ccpv::load_roc_csv(csv));

  std::ofstream out(args.out, std::ios::binary);
  if (!out) ccpv::raise(ccpv::ErrorCode::Io, "cannot write plot: " + args.out);
  out << render_roc_svg(curves, args.title);
  if (!out) ccpv::raise(ccpv::ErrorCode::Io, "failed writing plot: " + args.out);
  std::cerr << "wrote " << args.out << " with " << curves.size() << " curve(s)\n";

  json doc;
  doc["plot"] = args.out;
  doc["curves"] = curves.size();
  emit(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-chirality palmprint verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  PrepareArgs prepare;
  CLI::App* prep = app.add_subcommand(
      "prepare-data", "Generate or split a dataset into train/test manifests");
  prep->add_flag("--synthetic", prepare.synthetic,
                 "Generate the synthetic mirror-premise corpus");
  prep->add_option("--manifest", prepare.manifest,
                   "Split an existing manifest CSV instead of generating");
  prep->add_option("--identities", prepare.identities, "Synthetic identities")
      ->check(CLI::PositiveNumber);
  prep->add_option("--images-per-palm", prepare.images_per_palm,
                   "Synthetic samples per palm")
      ->check(CLI::PositiveNumber);
  prep->add_option("--side", prepare.side, "Synthetic image side in pixels")
      ->check(CLI::PositiveNumber);
  prep->add_option("--noise-sigma", prepare.noise_sigma,
                   "Per-sample Gaussian noise level");
  prep->add_option("--seed", prepare.seed, "Master seed");
  prep->add_option("--train-left", prepare.train_left,
                   "Left-hand samples per identity assigned to train");
  prep->add_option("--train-right", prepare.train_right,
                   "Right-hand samples per identity assigned to train");
  prep->add_option("--out", prepare.out, "Output directory")->required();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train an embedding model");
  train->add_option("--config", train_args.config, "Train config JSON")
      ->envname("CCPV_CONFIG");
  train->add_option("--data", train_args.data, "Training manifest CSV")
      ->required();
  train->add_option("--out", train_args.out, "Checkpoint output path");
  train->add_option("--log", train_args.log, "Training log CSV path");
  train->add_option("--framework", train_args.framework,
                    "ccpv|naive|traditional|lrpr");
  train->add_option("--seed", train_args.seed, "Master seed");
  train->add_option("--epochs", train_args.epochs, "Training epochs");
  train->add_option("--batch-identities", train_args.batch_identities,
                    "Identities per optimizer step");
  train->add_option("--learning-rate", train_args.learning_rate,
                    "Adam learning rate");
  train->add_option("--tau", train_args.tau, "Consistency-term temperature");
  train->add_option("--beta", train_args.beta, "Distance scale");
  train->add_option("--w-ce", train_args.w_ce, "Cross-entropy weight");
  train->add_option("--w-cc", train_args.w_cc, "Consistency-loss weight");
  train->add_option("--arch", train_args.arch, "Backbone architecture");
  train->add_option("--embedding-dim", train_args.embedding_dim,
                    "Embedding dimension");
  train->add_option("--image-side", train_args.image_side,
                    "Model input side in pixels");
  train->add_option("--channels", train_args.channels,
                    "compact-cnn channel plan, e.g. 16,32,64,64");
  train->add_option("--ce-on-all-views", train_args.ce_on_all_views,
                    "Cross-entropy over flipped views too (true/false)");
  train->add_option("--as-written", train_args.as_written,
                    "Consistency denominator uses the anchor view");
  train->add_option("--traditional-side", train_args.traditional_side,
                    "Hand the traditional framework trains on (L|R)");
  train->add_option("--standardize", train_args.standardize,
                    "Per-image standardization (true/false)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate a checkpoint over verification protocols");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path")
      ->required();
  eval->add_option("--data", eval_args.data, "Test manifest CSV")->required();
  eval->add_option("--protocols", eval_args.protocols,
                   "Comma-separated tokens (l2l,r2r,l2r,r2l,xspec:<a>:<b>,"
                   "xdata) or 'all'");
  eval->add_option("--out-dir", eval_args.out_dir,
                   "Directory for reports, ROC CSVs, and score dumps");
  eval->add_option("--rule", eval_args.rule,
                   "Aggregation override: mean4|competition|single");
  eval->add_option("--pairing", eval_args.pairing,
                   "Four-distance pairing: cross|aswritten");
  eval->add_option("--roc-points", eval_args.roc_points,
                   "Cap ROC export size (0 = full curve)");
  eval->add_option("--far", eval_args.far_targets,
                   "FAR targets for GAR@FAR (repeatable)");

  EnrollArgs enroll_args;
  CLI::App* enroll =
      app.add_subcommand("enroll", "Add one palm image to a gallery file");
  enroll->add_option("--gallery", enroll_args.gallery,
                     "Gallery file (created when absent)")
      ->required();
  enroll->add_option("--checkpoint", enroll_args.checkpoint, "Checkpoint path")
      ->required();
  enroll->add_option("--image", enroll_args.image, "Palm image (PNG)")
      ->required();
  enroll->add_option("--identity", enroll_args.identity, "Identity key")
      ->required();
  enroll->add_option("--side", enroll_args.side, "Chirality of the image (L|R)");
  enroll->add_flag("--overwrite", enroll_args.overwrite,
                   "Replace an existing enrollment");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Verify a claimed identity against an enrolled gallery");
  verify->add_option("--gallery", verify_args.gallery, "Gallery file")
      ->required();
  verify->add_option("--checkpoint", verify_args.checkpoint, "Checkpoint path")
      ->required();
  verify->add_option("--image", verify_args.image, "Query palm image (PNG)")
      ->required();
  verify->add_option("--identity", verify_args.identity, "Claimed identity")
      ->required();
  verify->add_option("--threshold", verify_args.threshold,
                     "Accept when the aggregate distance is <= this")
      ->required();
  verify->add_option("--rule", verify_args.rule,
                     "Aggregation override: mean4|competition|single");
  verify->add_option("--pairing", verify_args.pairing,
                     "Four-distance pairing: cross|aswritten");
  verify->add_option("--side", verify_args.side,
                     "Chirality of the query image (L|R)");

  PlotArgs plot_args;
  CLI::App* plot =
      app.add_subcommand("plot-roc", "Render ROC CSV(s) to an SVG overlay");
  plot->add_option("csvs", plot_args.csvs, "ROC CSV files")
      ->required()
      ->expected(-1);
  plot->add_option("--out", plot_args.out, "Output SVG path")->required();
  plot->add_option("--title", plot_args.title, "Plot title");

  try {
    app.parse(argc, argv);
    if (prep->parsed()) return cmd_prepare_data(prepare);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (enroll->parsed()) return cmd_enroll(enroll_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (plot->parsed()) return cmd_plot_roc(plot_args);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return 2;  // every malformed invocation is a usage error
  } catch (const ccpv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
