// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_MATCHING_HPP
#define CCPV_MATCHING_HPP

#include <Eigen/Core>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccpv/datasets.hpp"
#include "ccpv/image.hpp"
#include "ccpv/model.hpp"

namespace ccpv {

// Angular distance arccos(cos-similarity) / beta, in [0, pi/beta]. Symmetric;
// zero-norm inputs raise ZeroNormTemplate.
double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double beta);

// Embeddings of an image and of its horizontal flip.
struct TemplatePair {
  Eigen::VectorXd original;
  Eigen::VectorXd flipped;
  std::string identity;
  // Chirality of the source image when known; verification itself never
  // consults it, protocols do.
  std::optional<Chirality> source_chirality;
};

enum class AggregateRule { Mean4, Competition, Single };

// How the four distances pair gallery and query templates. CrossProduct
// compares every gallery template against every query template. AsWritten
// swaps the second pairing to (gallery, its own flip) — a variant that
// ignores the query in that leg, kept for ablation.
enum class PairingMode { CrossProduct, AsWritten };

struct MatchResult {
  std::array<double, 4> d{};  // d1..d4
  double aggregate = 0.0;
  AggregateRule rule = AggregateRule::Mean4;
};

// Mean4: exact mean of d1..d4. Competition: exact minimum. Single: d1.
double aggregate_distances(const std::array<double, 4>& d, AggregateRule rule);

// The four-distance cross-chirality match between an enrolled pair and a
// query pair.
MatchResult four_match(const TemplatePair& gallery, const TemplatePair& query,
                       double beta, PairingMode pairing = PairingMode::CrossProduct,
                       AggregateRule rule = AggregateRule::Mean4);

struct VerifyOutcome {
  bool accept = false;
  MatchResult match;
  double threshold = 0.0;
};

// One enrolled TemplatePair per identity. Iteration order is the sorted
// identity order, so scoring is deterministic. Reads are const and safe to
// share; mutation is single-writer.
class GalleryStore {
 public:
  GalleryStore() = default;
  explicit GalleryStore(double beta) : beta_(beta) {}

  double beta() const { return beta_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& identity) const {
    return entries_.count(identity) != 0;
  }
  const std::map<std::string, TemplatePair>& entries() const { return entries_; }
  const TemplatePair& at(const std::string& identity) const;

  // Embeds the image and its flip with `model` and stores the pair. Existing
  // identities raise DuplicateIdentity unless overwrite is set.
  void enroll(const std::string& identity, const ImageArray& preprocessed,
              Backbone& model, bool overwrite = false,
              std::optional<Chirality> source_chirality = std::nullopt);
  // Stores an already-computed pair under pair.identity.
  void enroll_pair(TemplatePair pair, bool overwrite = false);

  VerifyOutcome verify(const std::string& identity, const ImageArray& preprocessed,
                       Backbone& model, double threshold,
                       PairingMode pairing = PairingMode::CrossProduct,
                       AggregateRule rule = AggregateRule::Mean4) const;

  // All identities ranked by ascending aggregate distance; ties break on the
  // identity key.
  std::vector<std::pair<std::string, double>> identify(
      const ImageArray& preprocessed, Backbone& model,
      PairingMode pairing = PairingMode::CrossProduct,
      AggregateRule rule = AggregateRule::Mean4) const;
  std::vector<std::pair<std::string, double>> identify_pair(
      const TemplatePair& query, PairingMode pairing = PairingMode::CrossProduct,
      AggregateRule rule = AggregateRule::Mean4) const;

  // Binary gallery file: magic + version + embedding dim + beta + entry
  // count, then per entry the identity, both templates as little-endian
  // float32, and a chirality byte.
  void save(const std::string& path) const;
  static GalleryStore load(const std::string& path);
  // Human-readable companion: identity, chirality, template values.
  void export_csv(const std::string& path) const;

 private:
  std::map<std::string, TemplatePair> entries_;
  double beta_ = 1.0;
  int dim_ = 0;
};

// Embeds one preprocessed image and its flip.
TemplatePair make_template_pair(const std::string& identity,
                                const ImageArray& preprocessed, Backbone& model,
                                std::optional<Chirality> source_chirality =
                                    std::nullopt);

}  // namespace ccpv

#endif  // CCPV_MATCHING_HPP
