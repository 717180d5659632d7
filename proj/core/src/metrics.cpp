// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ccpv/common.hpp"

namespace ccpv {

namespace {

void validate_scores(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    raise(ErrorCode::EmptyScores,
          "need at least one genuine and one impostor score");
  for (const auto& list : {scores.genuine, scores.impostor})
    for (double s : list)
      if (!std::isfinite(s)) raise(ErrorCode::Usage, "scores must be finite");
}

// Sorted copies let every FAR/FRR evaluation be a binary search.
struct SortedScores {
  std::vector<double> genuine;
  std::vector<double> impostor;

  explicit SortedScores(const ScoreSet& scores)
      : genuine(scores.genuine), impostor(scores.impostor) {
    std::sort(genuine.begin(), genuine.end());
    std::sort(impostor.begin(), impostor.end());
  }

  static double fraction_at_most(const std::vector<double>& sorted, double t) {
    const auto n_at_most =
        std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    return static_cast<double>(n_at_most) / static_cast<double>(sorted.size());
  }

  double far(double t) const { return fraction_at_most(impostor, t); }
  double gar(double t) const { return fraction_at_most(genuine, t); }
  double frr(double t) const { return 1.0 - gar(t); }
};

std::string format_far_target(double target) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", target);
  return buf;
}

}  // namespace

std::vector<double> candidate_thresholds(const ScoreSet& scores) {
  validate_scores(scores);
  std::vector<double> values = scores.genuine;
  values.insert(values.end(), scores.impostor.begin(), scores.impostor.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.reserve(2 * values.size() + 1);
  candidates.push_back(values.front() - 1.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    candidates.push_back(values[i]);
    if (i + 1 < values.size())
      candidates.push_back(0.5 * (values[i] + values[i + 1]));
  }
  candidates.push_back(values.back() + 1.0);
  return candidates;
}

double far_at(const ScoreSet& scores, double threshold) {
  validate_scores(scores);
  return SortedScores(scores).far(threshold);
}

double frr_at(const ScoreSet& scores, double threshold) {
  validate_scores(scores);
  return SortedScores(scores).frr(threshold);
}

EerResult eer(const ScoreSet& scores) {
  const std::vector<double> candidates = candidate_thresholds(scores);
  const SortedScores sorted(scores);
  EerResult best;
  best.eer = 2.0;  // above any reachable balanced error
  for (double t : candidates) {
    const double balanced = 0.5 * (sorted.far(t) + sorted.frr(t));
    if (balanced < best.eer) {  // strict: ties keep the smaller threshold
      best.eer = balanced;
      best.threshold = t;
    }
  }
  return best;
}

GarResult gar_at_far(const ScoreSet& scores, double far_target) {
  if (!(far_target > 0.0) || !(far_target < 1.0))
    raise(ErrorCode::Usage, "far target must lie in (0, 1)");
  const std::vector<double> candidates = candidate_thresholds(scores);
  const SortedScores sorted(scores);

  // FAR is non-decreasing in the threshold, so the qualifying candidates form
  // a prefix; the below-all sentinel (FAR = 0) always qualifies.
  std::size_t last_ok = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (sorted.far(candidates[i]) > far_target) break;
    last_ok = i;
  }

  GarResult result;
  result.threshold = candidates[last_ok];
  result.gar = sorted.gar(result.threshold);
  result.unreliable = last_ok == 0;
  if (result.unreliable) result.gar = 0.0;
  return result;
}

RocCurve roc(const ScoreSet& scores, std::size_t n_points) {
  if (n_points == 1)
    raise(ErrorCode::Usage, "a one-point curve cannot keep both endpoints");
  validate_scores(scores);
  const SortedScores sorted(scores);

  std::vector<double> values = scores.genuine;
  values.insert(values.end(), scores.impostor.begin(), scores.impostor.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> thresholds;
  thresholds.reserve(values.size() + 2);
  thresholds.push_back(values.front() - 1.0);
  thresholds.insert(thresholds.end(), values.begin(), values.end());
  thresholds.push_back(values.back() + 1.0);

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds)
    curve.points.push_back({t, sorted.far(t), sorted.gar(t)});

  if (n_points >= 2 && curve.points.size() > n_points) {
    std::vector<RocPoint> kept;
    kept.reserve(n_points);
    const std::size_t last = curve.points.size() - 1;
    std::size_t previous = curve.points.size();  // out of range
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::size_t index = (i * last + (n_points - 1) / 2) / (n_points - 1);
      if (index != previous) kept.push_back(curve.points[index]);
      previous = index;
    }
    curve.points = std::move(kept);
  }
  return curve;
}

double rank1_acc(
    const std::vector<std::pair<std::string, std::vector<std::string>>>&
        rankings) {
  if (rankings.empty()) raise(ErrorCode::EmptyInput, "no rankings");
  std::size_t correct = 0;
  for (const auto& [truth, ranked] : rankings) {
    if (ranked.empty()) raise(ErrorCode::EmptyInput, "ranking has no entries");
    if (ranked.front() == truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rankings.size());
}

MatchTable collect_matches(
    const GalleryStore& store,
    const std::vector<std::pair<std::string, ImageArray>>& queries,
    Backbone& model, PairingMode pairing, AggregateRule rule) {
  if (store.entries().empty()) raise(ErrorCode::EmptyGallery, "empty gallery");
  if (queries.empty())
    raise(ErrorCode::EmptyProtocolSelection, "no queries selected");

  MatchTable table;
  table.gallery_ids.reserve(store.entries().size());
  for (const auto& [identity, pair] : store.entries())
    table.gallery_ids.push_back(identity);

  table.query_ids.reserve(queries.size());
  table.distances.resize(static_cast<Eigen::Index>(queries.size()),
                         static_cast<Eigen::Index>(table.gallery_ids.size()));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& [identity, image] = queries[q];
    store.at(identity);  // genuine comparisons require enrollment
    table.query_ids.push_back(identity);
    const TemplatePair query = make_template_pair(identity, image, model);
    Eigen::Index column = 0;
    for (const auto& [gallery_id, enrolled] : store.entries()) {
      table.distances(static_cast<Eigen::Index>(q), column++) =
          four_match(enrolled, query, store.beta(), pairing, rule).aggregate;
    }
  }
  return table;
}

ScoreSet scores_from(const MatchTable& table) {
  ScoreSet scores;
  for (std::size_t q = 0; q < table.query_ids.size(); ++q) {
    const auto it = std::lower_bound(table.gallery_ids.begin(),
                                     table.gallery_ids.end(),
                                     table.query_ids[q]);
    if (it == table.gallery_ids.end() || *it != table.query_ids[q])
      raise(ErrorCode::UnknownIdentity,
            "query identity not in gallery: " + table.query_ids[q]);
    const auto genuine_column =
        static_cast<Eigen::Index>(it - table.gallery_ids.begin());
    for (Eigen::Index g = 0; g < table.distances.cols(); ++g) {
      const double d = table.distances(static_cast<Eigen::Index>(q), g);
      (g == genuine_column ? scores.genuine : scores.impostor).push_back(d);
    }
  }
  return scores;
}

std::vector<std::pair<std::string, std::vector<std::string>>> rankings_from(
    const MatchTable& table) {
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings;
  rankings.reserve(table.query_ids.size());
  for (std::size_t q = 0; q < table.query_ids.size(); ++q) {
    std::vector<std::pair<double, std::string>> row;
    row.reserve(table.gallery_ids.size());
    for (Eigen::Index g = 0; g < table.distances.cols(); ++g)
      row.emplace_back(table.distances(static_cast<Eigen::Index>(q), g),
                       table.gallery_ids[static_cast<std::size_t>(g)]);
    std::sort(row.begin(), row.end());
    std::vector<std::string> ranked;
    ranked.reserve(row.size());
    for (auto& [d, identity] : row) ranked.push_back(std::move(identity));
    rankings.emplace_back(table.query_ids[q], std::move(ranked));
  }
  return rankings;
}

ScoreSet collect_scores(
    const GalleryStore& store,
    const std::vector<std::pair<std::string, ImageArray>>& queries,
    Backbone& model, PairingMode pairing, AggregateRule rule) {
  return scores_from(collect_matches(store, queries, model, pairing, rule));
}

MetricsReport make_report(const std::string& protocol, const ScoreSet& scores,
                          double acc, const std::vector<double>& far_targets) {
  MetricsReport report;
  report.protocol = protocol;
  const EerResult point = eer(scores);
  report.eer = point.eer;
  report.threshold = point.threshold;
  for (double target : far_targets)
    report.gar_at_far[format_far_target(target)] =
        gar_at_far(scores, target).gar;
  report.acc = acc;
  report.n_genuine = scores.genuine.size();
  report.n_impostor = scores.impostor.size();
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["protocol"] = report.protocol;
  doc["eer"] = report.eer;
  doc["gar_at_far"] = report.gar_at_far;
  doc["acc"] = report.acc;
  doc["n_genuine"] = report.n_genuine;
  doc["n_impostor"] = report.n_impostor;
  doc["threshold"] = report.threshold;
  return doc.dump(2) + "\n";
}

void save_report(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write report: " + path);
  out << report_to_json(report);
  if (!out) raise(ErrorCode::Io, "failed writing report: " + path);
}

MetricsReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open report: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
    MetricsReport report;
    report.protocol = doc.at("protocol").get<std::string>();
    report.eer = doc.at("eer").get<double>();
    report.threshold = doc.at("threshold").get<double>();
    report.acc = doc.at("acc").get<double>();
    report.n_genuine = doc.at("n_genuine").get<std::size_t>();
    report.n_impostor = doc.at("n_impostor").get<std::size_t>();
    for (const auto& [key, value] : doc.at("gar_at_far").items())
      report.gar_at_far[key] = value.get<double>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::BadFormat, "malformed report " + path + ": " + e.what());
  }
}

void save_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write ROC: " + path);
  out << "threshold,far,gar\n";
  out.precision(17);
  for (const RocPoint& p : curve.points)
    out << p.threshold << ',' << p.far << ',' << p.gar << '\n';
  if (!out) raise(ErrorCode::Io, "failed writing ROC: " + path);
}

RocCurve load_roc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open ROC: " + path);
  std::string line;
  if (!std::getline(in, line))
    raise(ErrorCode::EmptyScores, "ROC CSV is empty: " + path);
  if (line != "threshold,far,gar")
    raise(ErrorCode::BadFormat, "not a ROC CSV: " + path);
  RocCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RocPoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p.threshold, &p.far,
                    &p.gar) != 3)
      raise(ErrorCode::BadFormat, "bad ROC row in " + path + ": " + line);
    curve.points.push_back(p);
  }
  if (curve.points.empty())
    raise(ErrorCode::EmptyScores, "ROC CSV has no points: " + path);
  return curve;
}

void save_scores_csv(const ScoreSet& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write scores: " + path);
  out << "kind,score\n";
  out.precision(17);
  for (double s : scores.genuine) out << "genuine," << s << '\n';
  for (double s : scores.impostor) out << "impostor," << s << '\n';
  if (!out) raise(ErrorCode::Io, "failed writing scores: " + path);
}

ScoreSet load_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open scores: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "kind,score")
    raise(ErrorCode::BadFormat, "not a score CSV: " + path);
  ScoreSet scores;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      raise(ErrorCode::BadFormat, "bad score row in " + path + ": " + line);
    const std::string kind = line.substr(0, comma);
    double value = 0.0;
    try {
      value = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      raise(ErrorCode::BadFormat, "bad score value in " + path + ": " + line);
    }
    if (kind == "genuine") scores.genuine.push_back(value);
    else if (kind == "impostor") scores.impostor.push_back(value);
    else raise(ErrorCode::BadFormat, "bad score kind in " + path + ": " + kind);
  }
  return scores;
}

}  // namespace ccpv
