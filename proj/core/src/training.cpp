// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/training.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <utility>

#include "ccpv/common.hpp"
#include "ccpv/transforms.hpp"

namespace ccpv {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kStepSalt = 0x57E9;

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Preprocessed images keyed by path; training revisits every image many
// times and the corpus is desk-scale, so caching them all is the right
// trade.
class ImageCache {
 public:
  ImageCache(PreprocessOptions options) : options_(options) {}

  const ImageArray& get(const std::string& path) {
    auto it = cache_.find(path);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(path, preprocess(load_png(path), options_))
        .first->second;
  }

 private:
  PreprocessOptions options_;
  std::map<std::string, ImageArray> cache_;
};

int label_of(const std::vector<std::string>& vocab, const std::string& identity) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), identity);
  if (it == vocab.end() || *it != identity)
    raise(ErrorCode::UnknownIdentity, "identity not in vocabulary: " + identity);
  return static_cast<int>(it - vocab.begin());
}

// dLoss/dEmbeddings and head-weight gradient for logits = E * W.
Eigen::MatrixXd backprop_head(ClassifierHead& head, const Eigen::MatrixXd& used,
                              const Eigen::MatrixXd& dlogits, double weight) {
  Eigen::Map<const RowMat> w(head.weight.value.data(), head.dim(),
                             head.classes());
  Eigen::Map<RowMat> dw(head.weight.grad.data(), head.dim(), head.classes());
  dw += weight * (used.transpose() * dlogits);
  return weight * (dlogits * w.transpose());
}

std::vector<int> repeat_labels(const std::vector<int>& labels, int times) {
  std::vector<int> out;
  out.reserve(labels.size() * static_cast<std::size_t>(times));
  for (int t = 0; t < times; ++t)
    out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace

Framework parse_framework(const std::string& token) {
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ccpv") return Framework::CCPV;
  if (lower == "naive") return Framework::Naive;
  if (lower == "traditional") return Framework::Traditional;
  if (lower == "lrpr") return Framework::LRPR;
  raise(ErrorCode::Usage,
        "unknown framework '" + token + "' (ccpv|naive|traditional|lrpr)");
}

std::string framework_token(Framework framework) {
  switch (framework) {
    case Framework::CCPV: return "ccpv";
    case Framework::Naive: return "naive";
    case Framework::Traditional: return "traditional";
    case Framework::LRPR: return "lrpr";
  }
  raise(ErrorCode::Usage, "unknown framework value");
}

std::string train_config_to_json(const TrainConfig& config) {
  json doc;
  doc["framework"] = framework_token(config.framework);
  doc["epochs"] = config.epochs;
  doc["batch_identities"] = config.batch_identities;
  doc["learning_rate"] = config.learning_rate;
  doc["tau"] = config.tau;
  doc["beta"] = config.beta;
  doc["w_ce"] = config.weights.w_ce;
  doc["w_cc"] = config.weights.w_cc;
  doc["seed"] = config.seed;
  doc["arch"] = config.backbone.arch;
  doc["embedding_dim"] = config.backbone.embedding_dim;
  doc["image_side"] = config.backbone.image_side;
  const auto channels = config.backbone.params.find("channels");
  if (channels != config.backbone.params.end())
    doc["channels"] = channels->second;
  doc["ce_on_all_views"] = config.ce_on_all_views;
  doc["as_written_denominator"] = config.as_written_denominator;
  doc["traditional_chirality"] = chirality_token(config.traditional_chirality);
  doc["standardize"] = config.standardize;
  return doc.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::BadFormat, std::string("config is not JSON: ") + e.what());
  }
  if (!doc.is_object()) raise(ErrorCode::BadFormat, "config must be an object");

  TrainConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "framework")
        config.framework = parse_framework(value.get<std::string>());
      else if (key == "epochs") config.epochs = value.get<int>();
      else if (key == "batch_identities")
        config.batch_identities = value.get<int>();
      else if (key == "learning_rate")
        config.learning_rate = value.get<double>();
      else if (key == "tau") config.tau = value.get<double>();
      else if (key == "beta") config.beta = value.get<double>();
      else if (key == "w_ce") config.weights.w_ce = value.get<double>();
      else if (key == "w_cc") config.weights.w_cc = value.get<double>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "arch") config.backbone.arch = value.get<std::string>();
      else if (key == "embedding_dim")
        config.backbone.embedding_dim = value.get<int>();
      else if (key == "image_side")
        config.backbone.image_side = value.get<int>();
      else if (key == "channels")
        config.backbone.params["channels"] = value.get<std::string>();
      else if (key == "ce_on_all_views")
        config.ce_on_all_views = value.get<bool>();
      else if (key == "as_written_denominator")
        config.as_written_denominator = value.get<bool>();
      else if (key == "traditional_chirality")
        config.traditional_chirality = parse_chirality(value.get<std::string>());
      else if (key == "standardize") config.standardize = value.get<bool>();
      else raise(ErrorCode::BadFormat, "unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::BadFormat, std::string("bad config value: ") + e.what());
  }
  return config;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return train_config_from_json(text);
}

void save_train_config(const TrainConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write config: " + path);
  out << train_config_to_json(config);
  if (!out) raise(ErrorCode::Io, "failed writing config: " + path);
}

namespace {

void validate_config(const TrainConfig& config) {
  if (config.epochs < 1) raise(ErrorCode::Usage, "epochs must be >= 1");
  if (config.batch_identities < 1)
    raise(ErrorCode::Usage, "batch_identities must be >= 1");
  if (!(config.learning_rate > 0.0))
    raise(ErrorCode::Usage, "learning_rate must be positive");
  if (!(config.tau > 0.0)) raise(ErrorCode::Usage, "tau must be positive");
  if (!(config.beta > 0.0)) raise(ErrorCode::Usage, "beta must be positive");
  if (config.weights.w_ce == 0.0 && config.weights.w_cc == 0.0)
    raise(ErrorCode::Usage, "loss weights must not both be zero");
}

// One sample per identity and step from a single-chirality pool, identity
// order reshuffled per step.
std::vector<PalmSample> sample_single_chirality_batch(
    const std::map<std::string, std::vector<PalmSample>>& pools, int n,
    std::uint64_t seed) {
  std::vector<std::string> identities;
  identities.reserve(pools.size());
  for (const auto& [identity, pool] : pools) identities.push_back(identity);
  if (n > static_cast<int>(identities.size()))
    raise(ErrorCode::BatchTooLarge,
          "batch wants " + std::to_string(n) + " identities, pool has " +
              std::to_string(identities.size()));
  Rng rng = make_rng(seed, 0x7AD1);
  std::shuffle(identities.begin(), identities.end(), rng);
  std::vector<PalmSample> batch;
  batch.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& pool = pools.at(identities[static_cast<std::size_t>(i)]);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    batch.push_back(pool[pick(rng)]);
  }
  return batch;
}

struct StepLosses {
  double l_ce = 0.0;
  double l_cc = 0.0;
  double total = 0.0;
};

}  // namespace

TrainArtifacts train(const TrainConfig& config, const DatasetManifest& train_set,
                     const std::string& checkpoint_path,
                     const std::string& log_csv_path) {
  validate_config(config);
  if (train_set.samples.empty())
    raise(ErrorCode::EmptyInput, "training manifest is empty");

  const bool paired = config.framework != Framework::Traditional;
  if (paired) {
    try {
      validate_both_hands(train_set);
    } catch (const Error& e) {
      raise(ErrorCode::InvalidFrameworkData,
            framework_token(config.framework) +
                " training needs both hands per identity: " + e.what());
    }
  }

  // Traditional training never sees the other hand, and treats each palm as
  // its own class: keys are suffixed with the chirality token.
  std::map<std::string, std::vector<PalmSample>> single_pools;
  std::vector<std::string> vocab;
  if (paired) {
    vocab = train_set.identities();
  } else {
    for (const PalmSample& sample : train_set.samples)
      if (sample.chirality == config.traditional_chirality)
        single_pools[sample.identity + ":" + chirality_token(sample.chirality)]
            .push_back(sample);
    if (single_pools.empty())
      raise(ErrorCode::InvalidFrameworkData,
            "traditional training found no " +
                chirality_token(config.traditional_chirality) +
                "-hand samples");
    for (auto& [identity, pool] : single_pools) {
      std::sort(pool.begin(), pool.end(),
                [](const PalmSample& a, const PalmSample& b) {
                  return a.image_path < b.image_path;
                });
      vocab.push_back(identity);
    }
  }
  if (vocab.size() < 2)
    raise(ErrorCode::InsufficientSamples,
          "training needs at least two identities");

  const auto started = std::chrono::steady_clock::now();

  std::unique_ptr<Backbone> model = create_backbone(config.backbone, config.seed);
  ClassifierHead head = ClassifierHead::make(
      config.backbone.embedding_dim, static_cast<int>(vocab.size()), config.seed);

  std::vector<ParamTensor*> params = model->parameters();
  params.push_back(&head.weight);
  AdamOptimizer optimizer(params, config.learning_rate);

  ImageCache cache(
      {.target_side = config.backbone.image_side, .standardize = config.standardize});

  std::ofstream log;
  if (!log_csv_path.empty()) {
    log.open(log_csv_path, std::ios::binary);
    if (!log) raise(ErrorCode::Io, "cannot write training log: " + log_csv_path);
    log << "epoch,step,l_ce,l_cc,total\n";
    log.precision(12);
  }

  const int n_identities = static_cast<int>(vocab.size());
  const int batch_n = std::min(config.batch_identities, n_identities);
  const int steps_per_epoch = (n_identities + batch_n - 1) / batch_n;
  const bool use_cc =
      config.framework == Framework::CCPV && config.weights.w_cc != 0.0;

  TrainReport report;
  std::uint64_t global_step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochStats stats{epoch, 0.0, 0.0, 0.0};
    for (int step = 1; step <= steps_per_epoch; ++step, ++global_step) {
      const std::uint64_t step_seed =
          derive_seed(config.seed, kStepSalt, global_step);

      std::vector<ImageArray> images;
      std::vector<int> labels;
      int views = 1;
      if (paired) {
        const std::vector<IdentityTriple> triples =
            sample_identity_batch(train_set, batch_n, step_seed);
        const std::size_t n = triples.size();
        labels.reserve(n);
        views = config.framework == Framework::CCPV ? 4 : 2;
        images.reserve(n * static_cast<std::size_t>(views));
        for (const IdentityTriple& t : triples) {
          labels.push_back(label_of(vocab, t.identity));
          images.push_back(cache.get(t.left.image_path));
        }
        for (const IdentityTriple& t : triples) {
          const ImageArray& right = cache.get(t.right.image_path);
          images.push_back(config.framework == Framework::LRPR ? flip(right)
                                                               : right);
        }
        if (views == 4) {
          for (std::size_t i = 0; i < n; ++i) images.push_back(flip(images[i]));
          for (std::size_t i = 0; i < n; ++i)
            images.push_back(flip(images[n + i]));
        }
      } else {
        const std::vector<PalmSample> batch =
            sample_single_chirality_batch(single_pools, batch_n, step_seed);
        labels.reserve(batch.size());
        images.reserve(batch.size());
        for (const PalmSample& sample : batch) {
          labels.push_back(label_of(
              vocab, sample.identity + ":" + chirality_token(sample.chirality)));
          images.push_back(cache.get(sample.image_path));
        }
      }

      const Eigen::MatrixXd embeddings = model->forward(images, /*keep_state=*/true);
      const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
      Eigen::MatrixXd grad_embeddings =
          Eigen::MatrixXd::Zero(embeddings.rows(), embeddings.cols());

      StepLosses losses;
      {
        const int ce_views =
            views == 4 ? (config.ce_on_all_views ? 4 : 2) : views;
        const Eigen::MatrixXd used = embeddings.topRows(ce_views * n);
        Eigen::MatrixXd dlogits;
        losses.l_ce = cross_entropy(classify(head, used),
                                    repeat_labels(labels, ce_views), &dlogits);
        grad_embeddings.topRows(ce_views * n) =
            backprop_head(head, used, dlogits, config.weights.w_ce);
      }

      if (use_cc) {
        CCBatch batch;
        batch.e_l = embeddings.middleRows(0, n);
        batch.e_r = embeddings.middleRows(n, n);
        batch.e_fl = embeddings.middleRows(2 * n, n);
        batch.e_fr = embeddings.middleRows(3 * n, n);
        batch.labels = labels;
        batch.tau = config.tau;
        batch.as_written = config.as_written_denominator;
        CCGrads grads;
        losses.l_cc = cc_loss(batch, &grads);
        grad_embeddings.middleRows(0, n) += config.weights.w_cc * grads.e_l;
        grad_embeddings.middleRows(n, n) += config.weights.w_cc * grads.e_r;
        grad_embeddings.middleRows(2 * n, n) += config.weights.w_cc * grads.e_fl;
        grad_embeddings.middleRows(3 * n, n) += config.weights.w_cc * grads.e_fr;
      }

      losses.total = total_loss(losses.l_ce, losses.l_cc, config.weights);

      model->backward(grad_embeddings);
      optimizer.step();
      optimizer.zero_grad();

      if (log.is_open())
        log << epoch << ',' << step << ',' << losses.l_ce << ',' << losses.l_cc
            << ',' << losses.total << '\n';
      stats.l_ce += losses.l_ce;
      stats.l_cc += losses.l_cc;
      stats.total += losses.total;
    }
    stats.l_ce /= steps_per_epoch;
    stats.l_cc /= steps_per_epoch;
    stats.total /= steps_per_epoch;
    report.epochs.push_back(stats);
  }

  if (log.is_open() && !log)
    raise(ErrorCode::Io, "failed writing training log: " + log_csv_path);

  if (!checkpoint_path.empty()) {
    save_checkpoint(checkpoint_path, *model, &head, vocab,
                    train_config_to_json(config));
    report.checkpoint_path = checkpoint_path;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  TrainArtifacts artifacts;
  artifacts.model = std::move(model);
  artifacts.head = std::move(head);
  artifacts.class_vocab = std::move(vocab);
  artifacts.report = std::move(report);
  return artifacts;
}

ProtocolSpec parse_protocol(const std::string& token) {
  ProtocolSpec spec;
  spec.token = token;
  if (token == "l2l") {
    spec.gallery_side = spec.query_side = Chirality::Left;
    return spec;
  }
  if (token == "r2r") {
    spec.gallery_side = spec.query_side = Chirality::Right;
    return spec;
  }
  if (token == "l2r" || token == "xdata") {
    spec.gallery_side = Chirality::Left;
    spec.query_side = Chirality::Right;
    return spec;
  }
  if (token == "r2l") {
    spec.gallery_side = Chirality::Right;
    spec.query_side = Chirality::Left;
    return spec;
  }
  if (token.rfind("xspec:", 0) == 0) {
    const std::string rest = token.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size())
      raise(ErrorCode::Usage, "cross-spectral token is xspec:<gallery>:<query>");
    try {
      spec.gallery_spectrum = parse_spectrum(rest.substr(0, colon));
      spec.query_spectrum = parse_spectrum(rest.substr(colon + 1));
    } catch (const Error&) {
      raise(ErrorCode::Usage, "unknown spectrum in protocol: " + token);
    }
    spec.gallery_side = Chirality::Left;
    spec.query_side = Chirality::Right;
    return spec;
  }
  raise(ErrorCode::Usage,
        "unknown protocol '" + token +
            "' (l2l|r2r|l2r|r2l|xspec:<a>:<b>|xdata|all)");
}

std::vector<std::string> expand_protocols(const std::string& tokens,
                                          const DatasetManifest& test,
                                          std::vector<std::string>* warnings) {
  std::vector<std::string> raw;
  std::string current;
  for (char c : tokens) {
    if (c == ',') {
      if (!current.empty()) raw.push_back(current);
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) raw.push_back(current);
  if (raw.empty()) raise(ErrorCode::Usage, "no protocols given");

  std::vector<std::string> expanded;
  std::set<std::string> seen;
  const auto add = [&](const std::string& token) {
    if (seen.insert(token).second) expanded.push_back(token);
  };
  for (const std::string& token : raw) {
    if (token != "all") {
      parse_protocol(token);  // validate early
      add(token);
      continue;
    }
    for (const char* t : {"l2l", "r2r", "l2r", "r2l"}) add(t);
    std::set<std::string> spectra;
    for (const PalmSample& sample : test.samples)
      spectra.insert(spectrum_token(sample.spectrum));
    if (spectra.size() < 2) {
      if (warnings)
        warnings->push_back(
            "cross-spectral protocols skipped: test data carries " +
            std::to_string(spectra.size()) + " spectrum(s)");
      continue;
    }
    for (const std::string& a : spectra)
      for (const std::string& b : spectra)
        if (a != b) add("xspec:" + a + ":" + b);
  }
  return expanded;
}

TrainConfig config_from_checkpoint(const Checkpoint& checkpoint) {
  TrainConfig config;
  if (!checkpoint.train_config_json.empty())
    config = train_config_from_json(checkpoint.train_config_json);
  config.backbone = checkpoint.backbone;
  return config;
}

AggregateRule default_rule(Framework framework) {
  return framework == Framework::CCPV ? AggregateRule::Mean4
                                      : AggregateRule::Single;
}

std::vector<EvalResult> evaluate(const Checkpoint& checkpoint,
                                 const DatasetManifest& test_set,
                                 const std::vector<std::string>& protocols,
                                 const EvalOptions& options) {
  if (protocols.empty()) raise(ErrorCode::Usage, "no protocols given");
  const TrainConfig config = config_from_checkpoint(checkpoint);
  const AggregateRule rule = options.rule.value_or(default_rule(config.framework));
  const bool canonicalize = config.framework == Framework::LRPR;

  std::unique_ptr<Backbone> model = restore_backbone(checkpoint);
  ImageCache cache(
      {.target_side = config.backbone.image_side, .standardize = config.standardize});
  const auto view_of = [&](const PalmSample& sample) -> ImageArray {
    const ImageArray& image = cache.get(sample.image_path);
    if (canonicalize && sample.chirality == Chirality::Right)
      return flip(image);
    return image;
  };

  std::vector<EvalResult> results;
  results.reserve(protocols.size());
  for (const std::string& token : protocols) {
    const ProtocolSpec spec = parse_protocol(token);

    // Gallery: the lexically first matching sample of every identity.
    std::map<std::string, const PalmSample*> gallery;
    for (const PalmSample& sample : test_set.samples) {
      if (sample.chirality != spec.gallery_side) continue;
      if (spec.gallery_spectrum && sample.spectrum != *spec.gallery_spectrum)
        continue;
      auto [it, inserted] = gallery.emplace(sample.identity, &sample);
      if (!inserted && sample.image_path < it->second->image_path)
        it->second = &sample;
    }
    if (gallery.empty())
      raise(ErrorCode::ProtocolDataMissing,
            "protocol " + token + ": no gallery samples in test set");

    std::set<std::string> enrolled_paths;
    for (const auto& [identity, sample] : gallery)
      enrolled_paths.insert(sample->image_path);

    std::vector<const PalmSample*> queries;
    for (const PalmSample& sample : test_set.samples) {
      if (sample.chirality != spec.query_side) continue;
      if (spec.query_spectrum && sample.spectrum != *spec.query_spectrum)
        continue;
      if (enrolled_paths.count(sample.image_path) != 0) continue;
      if (gallery.count(sample.identity) == 0) continue;  // nothing to match
      queries.push_back(&sample);
    }
    if (queries.empty())
      raise(ErrorCode::ProtocolDataMissing,
            "protocol " + token + ": no query samples in test set");

    GalleryStore store(config.beta);
    for (const auto& [identity, sample] : gallery)
      store.enroll(identity, view_of(*sample), *model, /*overwrite=*/false,
                   sample->chirality);

    std::vector<std::pair<std::string, ImageArray>> query_images;
    query_images.reserve(queries.size());
    for (const PalmSample* sample : queries)
      query_images.emplace_back(sample->identity, view_of(*sample));

    const MatchTable table =
        collect_matches(store, query_images, *model, options.pairing, rule);

    EvalResult result;
    result.protocol = token;
    result.scores = scores_from(table);
    result.report = make_report(token, result.scores,
                                rank1_acc(rankings_from(table)),
                                options.far_targets);
    result.curve = roc(result.scores, options.roc_points);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace ccpv
