// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_TRAINING_HPP
#define CCPV_TRAINING_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccpv/datasets.hpp"
#include "ccpv/losses.hpp"
#include "ccpv/matching.hpp"
#include "ccpv/metrics.hpp"
#include "ccpv/model.hpp"

namespace ccpv {

// Training regimes compared throughout: the cross-chirality scheme itself,
// a naive both-hands baseline (same sampling, identity labels, no
// consistency term), a traditional single-hand verifier, and a baseline that
// canonicalizes right palms to left orientation by flipping.
enum class Framework { CCPV, Naive, Traditional, LRPR };

Framework parse_framework(const std::string& token);  // ccpv|naive|traditional|lrpr
std::string framework_token(Framework framework);

struct TrainConfig {
  Framework framework = Framework::CCPV;
  int epochs = 50;
  // Identities drawn per step; clamped to the identity count of the train
  // set. One (left, right) pair is sampled per drawn identity.
  int batch_identities = 64;
  double learning_rate = 1e-3;
  double tau = 0.07;
  double beta = 1.0;
  LossWeights weights;
  std::uint64_t seed = 0;
  BackboneConfig backbone;
  // Cross-entropy over all four views (original + flipped), or only over the
  // two original ones.
  bool ce_on_all_views = true;
  // Denominator view of the consistency term; see cc_term.
  bool as_written_denominator = true;
  // Which hand the traditional framework trains and enrolls on.
  Chirality traditional_chirality = Chirality::Left;
  bool standardize = false;
};

// Flat JSON round-trip; unknown keys are rejected so config typos fail loud.
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& config, const std::string& path);

struct EpochStats {
  int epoch = 0;
  double l_ce = 0.0;
  double l_cc = 0.0;
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;  // per-epoch mean losses
  std::string checkpoint_path;     // empty when not saved
  double wall_seconds = 0.0;
};

struct TrainArtifacts {
  std::unique_ptr<Backbone> model;
  ClassifierHead head;
  std::vector<std::string> class_vocab;
  TrainReport report;
};

// Runs the configured regime over the manifest. Deterministic in
// config.seed: identical (config, manifest) pairs produce bit-identical
// parameters, logs, and reports. checkpoint_path/log_csv_path are optional
// outputs; the log is CSV `epoch,step,l_ce,l_cc,total` with one row per
// optimizer step. Any non-finite loss aborts.
TrainArtifacts train(const TrainConfig& config, const DatasetManifest& train_set,
                     const std::string& checkpoint_path = "",
                     const std::string& log_csv_path = "");

// One evaluation protocol: which chirality (and optionally which spectrum)
// is enrolled versus queried.
struct ProtocolSpec {
  std::string token;
  Chirality gallery_side = Chirality::Left;
  Chirality query_side = Chirality::Right;
  std::optional<Spectrum> gallery_spectrum;
  std::optional<Spectrum> query_spectrum;
};

// Tokens: l2l, r2r, l2r, r2l, xspec:<gallery>:<query> (spectrum names), and
// xdata (left-enrolls / right-queries a held-out-identity manifest).
ProtocolSpec parse_protocol(const std::string& token);

// Splits a comma-separated token list; "all" expands to the four chirality
// protocols plus every ordered spectrum pair present in `test` (skipping, with
// a warning, cross-spectral when the data carries fewer than two spectra).
std::vector<std::string> expand_protocols(const std::string& tokens,
                                          const DatasetManifest& test,
                                          std::vector<std::string>* warnings);

struct EvalOptions {
  // Aggregation override; by default the checkpoint's framework decides
  // (CCPV uses the four-distance mean, the baselines their single distance).
  std::optional<AggregateRule> rule;
  PairingMode pairing = PairingMode::CrossProduct;
  std::vector<double> far_targets = {1e-3, 1e-5, 1e-6};
  std::size_t roc_points = 0;  // 0 = full curve
};

struct EvalResult {
  std::string protocol;
  MetricsReport report;
  RocCurve curve;
  ScoreSet scores;
};

// Per protocol: enroll the first test sample per identity of the gallery
// side, query every remaining sample of the query side, score, and report.
// The LRPR regime flips right-hand images to left orientation before
// embedding, matching how it was trained.
std::vector<EvalResult> evaluate(const Checkpoint& checkpoint,
                                 const DatasetManifest& test_set,
                                 const std::vector<std::string>& protocols,
                                 const EvalOptions& options = {});

// The config recorded in a checkpoint, or defaults for untrained ones.
TrainConfig config_from_checkpoint(const Checkpoint& checkpoint);

// The aggregation a framework verifies with when no override is given.
AggregateRule default_rule(Framework framework);

}  // namespace ccpv

#endif  // CCPV_TRAINING_HPP
