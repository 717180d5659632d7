// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_METRICS_HPP
#define CCPV_METRICS_HPP

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ccpv/image.hpp"
#include "ccpv/matching.hpp"
#include "ccpv/model.hpp"

namespace ccpv {

// Distances from genuine (same-identity) and impostor (cross-identity)
// comparisons. Lower means more similar; a comparison is accepted when its
// distance is <= the operating threshold.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

struct GarResult {
  double gar = 0.0;
  double threshold = 0.0;
  // True when no real threshold meets the FAR target, i.e. even accepting
  // nothing but scores below the smallest observed one already violates it.
  bool unreliable = false;
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double gar = 0.0;
};

// Step curve sampled at every distinct score (plus sentinels below and above
// all scores, so the curve always spans (0,0) .. (1,1)). far and gar are
// non-decreasing in threshold.
struct RocCurve {
  std::vector<RocPoint> points;
};

// All aggregate distances between a query set and a gallery, before they are
// split into genuine/impostor scores or rankings.
struct MatchTable {
  std::vector<std::string> gallery_ids;  // ascending identity order
  std::vector<std::string> query_ids;    // one per query, input order
  Eigen::MatrixXd distances;             // queries x gallery entries
};

// Candidate operating thresholds for a score set: the sorted distinct scores,
// the midpoints between neighbours, and one sentinel below and above all of
// them. Every step of FAR/FRR happens at one of these, so sweeping them is
// exhaustive.
std::vector<double> candidate_thresholds(const ScoreSet& scores);

double far_at(const ScoreSet& scores, double threshold);
double frr_at(const ScoreSet& scores, double threshold);

// Minimum over candidate thresholds of the balanced error (FAR + FRR) / 2,
// ties broken toward the smaller threshold.
EerResult eer(const ScoreSet& scores);

// GAR at the largest candidate threshold whose FAR stays within far_target.
// When only the below-all sentinel qualifies the result is 0 and flagged
// unreliable. Requires 0 < far_target < 1.
GarResult gar_at_far(const ScoreSet& scores, double far_target);

// Exact step curve; n_points == 0 keeps every point, n_points >= 2 subsamples
// uniformly by index while keeping both endpoints.
RocCurve roc(const ScoreSet& scores, std::size_t n_points = 0);

// Fraction of rankings whose first entry equals the true identity.
double rank1_acc(
    const std::vector<std::pair<std::string, std::vector<std::string>>>&
        rankings);

// Matches every query against every gallery entry. Queries are
// (true identity, preprocessed image); all true identities must be enrolled.
MatchTable collect_matches(
    const GalleryStore& store,
    const std::vector<std::pair<std::string, ImageArray>>& queries,
    Backbone& model, PairingMode pairing = PairingMode::CrossProduct,
    AggregateRule rule = AggregateRule::Mean4);

// genuine = the column matching each query's identity, impostor = the rest.
ScoreSet scores_from(const MatchTable& table);

// Per-query identities ranked by ascending distance (identity breaks ties),
// paired with the true identity — the input rank1_acc expects.
std::vector<std::pair<std::string, std::vector<std::string>>> rankings_from(
    const MatchTable& table);

ScoreSet collect_scores(
    const GalleryStore& store,
    const std::vector<std::pair<std::string, ImageArray>>& queries,
    Backbone& model, PairingMode pairing = PairingMode::CrossProduct,
    AggregateRule rule = AggregateRule::Mean4);

struct MetricsReport {
  std::string protocol;
  double eer = 0.0;
  double threshold = 0.0;
  // Keyed by the FAR target formatted with %g ("0.001", "1e-05", ...).
  std::map<std::string, double> gar_at_far;
  double acc = 0.0;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

MetricsReport make_report(const std::string& protocol, const ScoreSet& scores,
                          double acc,
                          const std::vector<double>& far_targets = {
                              1e-3, 1e-5, 1e-6});

std::string report_to_json(const MetricsReport& report);
void save_report(const MetricsReport& report, const std::string& path);
MetricsReport load_report(const std::string& path);

void save_roc_csv(const RocCurve& curve, const std::string& path);
RocCurve load_roc_csv(const std::string& path);

// Raw score dump, CSV `kind,score` with kind in {genuine, impostor} — enough
// to recompute every metric in a report.
void save_scores_csv(const ScoreSet& scores, const std::string& path);
ScoreSet load_scores_csv(const std::string& path);

}  // namespace ccpv

#endif  // CCPV_METRICS_HPP
