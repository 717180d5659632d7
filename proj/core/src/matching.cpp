// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ccpv/common.hpp"
#include "ccpv/transforms.hpp"

namespace ccpv {

double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double beta) {
  if (a.size() != b.size())
    raise(ErrorCode::DimMismatch, "templates differ in dimension");
  if (!(beta > 0.0)) raise(ErrorCode::Usage, "beta must be positive");
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12)
    raise(ErrorCode::ZeroNormTemplate, "cannot measure a zero-norm template");
  const double cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(cosine) / beta;
}

double aggregate_distances(const std::array<double, 4>& d, AggregateRule rule) {
  switch (rule) {
    case AggregateRule::Mean4:
      return (d[0] + d[1] + d[2] + d[3]) / 4.0;
    case AggregateRule::Competition:
      return std::min(std::min(d[0], d[1]), std::min(d[2], d[3]));
    case AggregateRule::Single:
      return d[0];
  }
  raise(ErrorCode::Usage, "unknown aggregate rule");
}

MatchResult four_match(const TemplatePair& gallery, const TemplatePair& query,
                       double beta, PairingMode pairing, AggregateRule rule) {
  MatchResult result;
  result.rule = rule;
  result.d[0] = distance(gallery.original, query.original, beta);
  result.d[1] = pairing == PairingMode::CrossProduct
                    ? distance(gallery.original, query.flipped, beta)
                    : distance(gallery.original, gallery.flipped, beta);
  result.d[2] = distance(gallery.flipped, query.original, beta);
  result.d[3] = distance(gallery.flipped, query.flipped, beta);
  result.aggregate = aggregate_distances(result.d, rule);
  return result;
}

TemplatePair make_template_pair(const std::string& identity,
                                const ImageArray& preprocessed, Backbone& model,
                                std::optional<Chirality> source_chirality) {
  const Eigen::MatrixXd embeddings =
      model.embed({preprocessed, flip(preprocessed)});
  TemplatePair pair;
  pair.identity = identity;
  pair.original = embeddings.row(0);
  pair.flipped = embeddings.row(1);
  pair.source_chirality = source_chirality;
  return pair;
}

const TemplatePair& GalleryStore::at(const std::string& identity) const {
  auto it = entries_.find(identity);
  if (it == entries_.end())
    raise(ErrorCode::UnknownIdentity, "identity not enrolled: " + identity);
  return it->second;
}

void GalleryStore::enroll(const std::string& identity,
                          const ImageArray& preprocessed, Backbone& model,
                          bool overwrite,
                          std::optional<Chirality> source_chirality) {
  enroll_pair(make_template_pair(identity, preprocessed, model, source_chirality),
              overwrite);
}

void GalleryStore::enroll_pair(TemplatePair pair, bool overwrite) {
  if (pair.identity.empty())
    raise(ErrorCode::Usage, "cannot enroll an empty identity");
  if (pair.original.size() == 0 || pair.original.size() != pair.flipped.size())
    raise(ErrorCode::DimMismatch, "template pair dimensions disagree");
  if (dim_ == 0) {
    dim_ = static_cast<int>(pair.original.size());
  } else if (dim_ != static_cast<int>(pair.original.size())) {
    raise(ErrorCode::DimMismatch,
          "gallery holds dim " + std::to_string(dim_) + ", got " +
              std::to_string(pair.original.size()));
  }
  if (!overwrite && entries_.count(pair.identity) != 0)
    raise(ErrorCode::DuplicateIdentity, "already enrolled: " + pair.identity);
  entries_[pair.identity] = std::move(pair);
}

VerifyOutcome GalleryStore::verify(const std::string& identity,
                                   const ImageArray& preprocessed,
                                   Backbone& model, double threshold,
                                   PairingMode pairing,
                                   AggregateRule rule) const {
  if (entries_.empty()) raise(ErrorCode::EmptyGallery, "gallery is empty");
  const TemplatePair& enrolled = at(identity);
  const TemplatePair query = make_template_pair(identity, preprocessed, model);
  VerifyOutcome outcome;
  outcome.match = four_match(enrolled, query, beta_, pairing, rule);
  outcome.threshold = threshold;
  outcome.accept = outcome.match.aggregate <= threshold;
  return outcome;
}

std::vector<std::pair<std::string, double>> GalleryStore::identify_pair(
    const TemplatePair& query, PairingMode pairing, AggregateRule rule) const {
  if (entries_.empty()) raise(ErrorCode::EmptyGallery, "gallery is empty");
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(entries_.size());
  for (const auto& [identity, enrolled] : entries_) {
    ranked.emplace_back(identity,
                        four_match(enrolled, query, beta_, pairing, rule).aggregate);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second < b.second;
                     return a.first < b.first;
                   });
  return ranked;
}

std::vector<std::pair<std::string, double>> GalleryStore::identify(
    const ImageArray& preprocessed, Backbone& model, PairingMode pairing,
    AggregateRule rule) const {
  return identify_pair(make_template_pair("", preprocessed, model), pairing, rule);
}

namespace {

constexpr char kGalleryMagic[8] = {'C', 'C', 'P', 'V', 'G', 'A', 'L', '1'};

void write_f32(std::ofstream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v(i));
    out.write(reinterpret_cast<const char*>(&f), sizeof f);
  }
}

Eigen::VectorXd read_f32(std::ifstream& in, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) {
    float f = 0.0f;
    in.read(reinterpret_cast<char*>(&f), sizeof f);
    v(i) = f;
  }
  return v;
}

}  // namespace

void GalleryStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write gallery: " + path);
  out.write(kGalleryMagic, sizeof kGalleryMagic);
  const std::uint32_t version = 1;
  const std::uint32_t dim = static_cast<std::uint32_t>(dim_);
  const float beta = static_cast<float>(beta_);
  const std::uint32_t count = static_cast<std::uint32_t>(entries_.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&beta), sizeof beta);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto& [identity, pair] : entries_) {
    const std::uint32_t len = static_cast<std::uint32_t>(identity.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(identity.data(), len);
    write_f32(out, pair.original);
    write_f32(out, pair.flipped);
    const std::uint8_t chirality =
        pair.source_chirality.has_value()
            ? (*pair.source_chirality == Chirality::Left ? 0 : 1)
            : 2;
    out.write(reinterpret_cast<const char*>(&chirality), sizeof chirality);
  }
  if (!out) raise(ErrorCode::Io, "failed writing gallery: " + path);
}

GalleryStore GalleryStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open gallery: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kGalleryMagic, sizeof magic) != 0)
    raise(ErrorCode::BadFormat, "not a gallery file: " + path);
  std::uint32_t version = 0, dim = 0, count = 0;
  float beta = 0.0f;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&beta), sizeof beta);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || version != 1 || dim == 0 || !(beta > 0.0f))
    raise(ErrorCode::BadFormat, "corrupt gallery header: " + path);

  GalleryStore store(beta);
  for (std::uint32_t e = 0; e < count; ++e) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len == 0 || len > 4096)
      raise(ErrorCode::BadFormat, "corrupt gallery entry: " + path);
    std::string identity(len, '\0');
    in.read(identity.data(), len);
    TemplatePair pair;
    pair.identity = identity;
    pair.original = read_f32(in, static_cast<int>(dim));
    pair.flipped = read_f32(in, static_cast<int>(dim));
    std::uint8_t chirality = 2;
    in.read(reinterpret_cast<char*>(&chirality), sizeof chirality);
    if (!in) raise(ErrorCode::BadFormat, "truncated gallery entry: " + path);
    if (chirality == 0) pair.source_chirality = Chirality::Left;
    else if (chirality == 1) pair.source_chirality = Chirality::Right;
    store.enroll_pair(std::move(pair));
  }
  return store;
}

void GalleryStore::export_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write gallery CSV: " + path);
  out << "identity,chirality";
  for (int i = 0; i < dim_; ++i) out << ",orig_" << i;
  for (int i = 0; i < dim_; ++i) out << ",flip_" << i;
  out << '\n';
  out.precision(9);
  for (const auto& [identity, pair] : entries_) {
    out << identity << ','
        << (pair.source_chirality.has_value()
                ? chirality_token(*pair.source_chirality)
                : "U");
    for (Eigen::Index i = 0; i < pair.original.size(); ++i)
      out << ',' << pair.original(i);
    for (Eigen::Index i = 0; i < pair.flipped.size(); ++i)
      out << ',' << pair.flipped(i);
    out << '\n';
  }
  if (!out) raise(ErrorCode::Io, "failed writing gallery CSV: " + path);
}

}  // namespace ccpv
