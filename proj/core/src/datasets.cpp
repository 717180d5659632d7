// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/datasets.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ccpv/common.hpp"
#include "ccpv/transforms.hpp"

namespace fs = std::filesystem;

namespace ccpv {
namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

// identity -> chirality presence
std::map<std::string, std::pair<bool, bool>> hand_presence(const DatasetManifest& m) {
  std::map<std::string, std::pair<bool, bool>> seen;
  for (const PalmSample& s : m.samples) {
    auto& flags = seen[s.identity];
    (s.chirality == Chirality::Left ? flags.first : flags.second) = true;
  }
  return seen;
}

}  // namespace

Chirality parse_chirality(const std::string& token) {
  const std::string t = trim(token);
  if (t == "L") return Chirality::Left;
  if (t == "R") return Chirality::Right;
  raise(ErrorCode::UnknownChirality, "expected L or R, got '" + token + "'");
}

std::string chirality_token(Chirality chirality) {
  return chirality == Chirality::Left ? "L" : "R";
}

Spectrum parse_spectrum(const std::string& token) {
  const std::string t = lower(trim(token));
  if (t == "red") return Spectrum::Red;
  if (t == "green") return Spectrum::Green;
  if (t == "blue") return Spectrum::Blue;
  if (t == "nir") return Spectrum::Nir;
  if (t == "white") return Spectrum::White;
  if (t == "synth") return Spectrum::Synth;
  raise(ErrorCode::BadFormat, "unknown spectrum '" + token + "'");
}

std::string spectrum_token(Spectrum spectrum) {
  switch (spectrum) {
    case Spectrum::Red: return "red";
    case Spectrum::Green: return "green";
    case Spectrum::Blue: return "blue";
    case Spectrum::Nir: return "nir";
    case Spectrum::White: return "white";
    case Spectrum::Synth: return "synth";
  }
  return "synth";
}

std::vector<std::string> DatasetManifest::identities() const {
  std::set<std::string> keys;
  for (const PalmSample& s : samples) keys.insert(s.identity);
  return {keys.begin(), keys.end()};
}

void validate_both_hands(const DatasetManifest& manifest) {
  std::string offenders;
  for (const auto& [identity, flags] : hand_presence(manifest)) {
    if (!flags.first || !flags.second) {
      if (!offenders.empty()) offenders += ", ";
      offenders += identity;
    }
  }
  if (!offenders.empty()) {
    raise(ErrorCode::IdentityWithoutBothHands,
          "identities missing a chirality: " + offenders);
  }
}

DatasetManifest load_manifest(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open manifest: " + csv_path);

  std::string header_line;
  if (!std::getline(in, header_line))
    raise(ErrorCode::EmptyInput, "manifest has no header: " + csv_path);

  const std::vector<std::string> header = split_csv(trim(header_line));
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(trim(header[i])) == name) return static_cast<int>(i);
    }
    raise(ErrorCode::MissingColumn, "manifest lacks column '" + name + "'");
  };
  const int col_path = column("path");
  const int col_identity = column("identity");
  const int col_chirality = column("chirality");
  const int col_session = column("session");
  const int col_spectrum = column("spectrum");

  const fs::path base = fs::path(csv_path).parent_path();

  DatasetManifest manifest;
  manifest.name = fs::path(csv_path).stem().string();
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::vector<std::string> fields = split_csv(stripped);
    const int needed = std::max({col_path, col_identity, col_chirality,
                                 col_session, col_spectrum});
    if (static_cast<int>(fields.size()) <= needed) {
      raise(ErrorCode::BadFormat, "manifest line " + std::to_string(line_no) +
                                      " has too few fields");
    }
    PalmSample sample;
    fs::path p = fs::path(trim(fields[col_path]));
    sample.image_path =
        (p.is_absolute() ? p : base / p).lexically_normal().string();
    sample.identity = trim(fields[col_identity]);
    if (sample.identity.empty())
      raise(ErrorCode::BadFormat,
            "empty identity at line " + std::to_string(line_no));
    sample.chirality = parse_chirality(fields[col_chirality]);
    try {
      sample.session = std::stoi(trim(fields[col_session]));
    } catch (const std::exception&) {
      raise(ErrorCode::BadFormat,
            "bad session at line " + std::to_string(line_no));
    }
    sample.spectrum = parse_spectrum(fields[col_spectrum]);
    manifest.samples.push_back(std::move(sample));
  }
  if (manifest.samples.empty())
    raise(ErrorCode::EmptyInput, "manifest has no samples: " + csv_path);

  validate_both_hands(manifest);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write manifest: " + csv_path);
  // Loading resolves relative paths against the CSV's directory, so store
  // them relative to it; that round-trips regardless of the caller's working
  // directory and keeps a generated corpus relocatable.
  const fs::path csv_dir = fs::absolute(fs::path(csv_path)).parent_path();
  out << "path,identity,chirality,session,spectrum\n";
  for (const PalmSample& s : manifest.samples) {
    const fs::path rel =
        fs::absolute(fs::path(s.image_path)).lexically_relative(csv_dir);
    const std::string path = rel.empty() ? s.image_path : rel.string();
    out << csv_escape(path) << ',' << csv_escape(s.identity) << ','
        << chirality_token(s.chirality) << ',' << s.session << ','
        << spectrum_token(s.spectrum) << '\n';
  }
  if (!out) raise(ErrorCode::Io, "failed writing manifest: " + csv_path);
}

SplitResult build_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (spec.train_left < 1 || spec.train_right < 1)
    raise(ErrorCode::Usage, "per-identity train counts must be >= 1");

  // identity -> chirality -> samples, ordered by path for determinism.
  std::map<std::string, std::array<std::vector<PalmSample>, 2>> groups;
  for (const PalmSample& s : manifest.samples) {
    groups[s.identity][s.chirality == Chirality::Left ? 0 : 1].push_back(s);
  }

  SplitResult result;
  result.train.name = manifest.name + "-train";
  result.test.name = manifest.name + "-test";
  std::uint64_t identity_index = 0;
  for (auto& [identity, sides] : groups) {
    for (int side = 0; side < 2; ++side) {
      auto& samples = sides[side];
      const int want = side == 0 ? spec.train_left : spec.train_right;
      if (static_cast<int>(samples.size()) < want + 1) {
        raise(ErrorCode::InsufficientSamples,
              "identity '" + identity + "' has " +
                  std::to_string(samples.size()) + " " +
                  (side == 0 ? "LEFT" : "RIGHT") + " samples; needs " +
                  std::to_string(want + 1) +
                  " to keep one test sample per chirality");
      }
      std::sort(samples.begin(), samples.end(),
                [](const PalmSample& a, const PalmSample& b) {
                  return a.image_path < b.image_path;
                });
      Rng rng = make_rng(spec.seed, identity_index, static_cast<std::uint64_t>(side));
      std::shuffle(samples.begin(), samples.end(), rng);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        (static_cast<int>(i) < want ? result.train : result.test)
            .samples.push_back(samples[i]);
      }
    }
    ++identity_index;
  }
  return result;
}

std::vector<IdentityTriple> sample_identity_batch(const DatasetManifest& manifest,
                                                  int n_identities,
                                                  std::uint64_t seed) {
  if (n_identities <= 0)
    raise(ErrorCode::Usage, "batch must request at least one identity");

  std::map<std::string, std::array<std::vector<const PalmSample*>, 2>> groups;
  for (const PalmSample& s : manifest.samples) {
    groups[s.identity][s.chirality == Chirality::Left ? 0 : 1].push_back(&s);
  }
  for (const auto& [identity, sides] : groups) {
    if (sides[0].empty() || sides[1].empty()) {
      raise(ErrorCode::InvalidFrameworkData,
            "identity '" + identity + "' lacks a chirality; paired sampling "
            "needs both hands");
    }
  }
  if (n_identities > static_cast<int>(groups.size())) {
    raise(ErrorCode::BatchTooLarge,
          "requested " + std::to_string(n_identities) + " identities, have " +
              std::to_string(groups.size()));
  }

  std::vector<std::string> keys;
  keys.reserve(groups.size());
  for (const auto& [identity, sides] : groups) keys.push_back(identity);
  Rng rng = make_rng(seed, 0x0BA7C4);
  std::shuffle(keys.begin(), keys.end(), rng);

  std::vector<IdentityTriple> batch;
  batch.reserve(n_identities);
  for (int i = 0; i < n_identities; ++i) {
    auto& sides = groups[keys[i]];
    for (auto& side : sides) {
      std::sort(side.begin(), side.end(),
                [](const PalmSample* a, const PalmSample* b) {
                  return a->image_path < b->image_path;
                });
    }
    std::uniform_int_distribution<std::size_t> pick_left(0, sides[0].size() - 1);
    std::uniform_int_distribution<std::size_t> pick_right(0, sides[1].size() - 1);
    IdentityTriple triple;
    triple.identity = keys[i];
    triple.left = *sides[0][pick_left(rng)];
    triple.right = *sides[1][pick_right(rng)];
    batch.push_back(std::move(triple));
  }
  return batch;
}

DatasetManifest generate_synthetic_dataset(const SynthSpec& spec,
                                           const std::string& out_dir) {
  if (spec.n_identities <= 0 || spec.images_per_palm <= 0 || spec.side <= 0)
    raise(ErrorCode::Usage, "synthetic spec requires positive counts and side");
  if (spec.noise_sigma < 0.0)
    raise(ErrorCode::Usage, "noise_sigma must be non-negative");

  const fs::path root(out_dir);
  const fs::path image_dir = root / "images";
  std::error_code ec;
  fs::create_directories(image_dir, ec);
  if (ec) raise(ErrorCode::Io, "cannot create " + image_dir.string());

  DatasetManifest manifest;
  manifest.name = "synthetic";

  for (int id = 0; id < spec.n_identities; ++id) {
    char identity[16];
    std::snprintf(identity, sizeof identity, "id%04d", id + 1);

    // Base texture: white noise inside [0.15, 0.85] so per-sample noise
    // rarely clips. Flip-decorrelated by construction.
    ImageArray base(1, spec.side, spec.side);
    {
      Rng rng = make_rng(spec.seed, static_cast<std::uint64_t>(id), 0xBA5E);
      std::uniform_real_distribution<double> texture(0.15, 0.85);
      for (double& v : base.data) v = texture(rng);
    }
    const ImageArray flipped = flip(base);

    for (int side = 0; side < 2; ++side) {
      const Chirality chirality = side == 0 ? Chirality::Left : Chirality::Right;
      const ImageArray& source = side == 0 ? base : flipped;
      for (int k = 0; k < spec.images_per_palm; ++k) {
        ImageArray sample = source;
        if (spec.noise_sigma > 0.0) {
          Rng rng = make_rng(spec.seed, static_cast<std::uint64_t>(id),
                             static_cast<std::uint64_t>(side) + 1,
                             static_cast<std::uint64_t>(k) + 1);
          std::normal_distribution<double> noise(0.0, spec.noise_sigma);
          for (double& v : sample.data)
            v = std::clamp(v + noise(rng), 0.0, 1.0);
        }
        char filename[48];
        std::snprintf(filename, sizeof filename, "%s_%s_%02d.png", identity,
                      chirality == Chirality::Left ? "L" : "R", k);
        const fs::path path = image_dir / filename;
        save_png_gray8(sample, path.string());

        PalmSample row;
        row.image_path = path.lexically_normal().string();
        row.identity = identity;
        row.chirality = chirality;
        row.session = k + 1;
        row.spectrum = Spectrum::Synth;
        manifest.samples.push_back(std::move(row));
      }
    }
  }

  save_manifest(manifest, (root / "manifest.csv").string());
  return manifest;
}

}  // namespace ccpv
