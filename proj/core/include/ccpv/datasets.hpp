// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_DATASETS_HPP
#define CCPV_DATASETS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ccpv/image.hpp"

namespace ccpv {

enum class Chirality { Left, Right };
enum class Spectrum { Red, Green, Blue, Nir, White, Synth };

// Manifest tokens: "L"/"R" for chirality, lowercase names for spectra.
Chirality parse_chirality(const std::string& token);
std::string chirality_token(Chirality chirality);
Spectrum parse_spectrum(const std::string& token);
std::string spectrum_token(Spectrum spectrum);

struct PalmSample {
  std::string image_path;
  std::string identity;
  Chirality chirality = Chirality::Left;
  int session = 1;
  Spectrum spectrum = Spectrum::Synth;

  bool operator==(const PalmSample&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::vector<PalmSample> samples;

  std::vector<std::string> identities() const;  // sorted, unique
};

// Reads a manifest CSV with header `path,identity,chirality,session,spectrum`
// (any column order, extra columns ignored). Relative image paths are
// resolved against the CSV's directory. Every identity must appear with both
// chiralities; violations are rejected with the offending identities named.
DatasetManifest load_manifest(const std::string& csv_path);

// Writes the canonical five-column CSV (UTF-8, LF line endings).
void save_manifest(const DatasetManifest& manifest, const std::string& csv_path);

// Enforces the both-hands invariant on an in-memory manifest.
void validate_both_hands(const DatasetManifest& manifest);

struct SplitSpec {
  int train_left = 5;   // per-identity LEFT samples assigned to train
  int train_right = 5;  // per-identity RIGHT samples assigned to train
  std::uint64_t seed = 0;
};

struct SplitResult {
  DatasetManifest train;
  DatasetManifest test;
};

// Seeded per-identity partition. Every identity keeps at least one test
// sample per chirality; identities with too few samples raise
// InsufficientSamples.
SplitResult build_splits(const DatasetManifest& manifest, const SplitSpec& spec);

struct IdentityTriple {
  PalmSample left;
  PalmSample right;
  std::string identity;
};

// Draws n distinct identities and one (left, right) sample pair for each.
// Deterministic in the seed; raises BatchTooLarge when n exceeds the number
// of identities present.
std::vector<IdentityTriple> sample_identity_batch(const DatasetManifest& manifest,
                                                  int n_identities,
                                                  std::uint64_t seed);

struct SynthSpec {
  int n_identities = 10;
  int images_per_palm = 4;
  int side = 128;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

// Generates the mirror-premise synthetic corpus: per identity a seeded
// white-noise base texture; LEFT samples are base + per-sample noise, RIGHT
// samples are flip(base) + per-sample noise, written as 8-bit grayscale PNGs
// under out_dir/images plus a manifest.csv. With noise_sigma == 0 the RIGHT
// images equal the flipped LEFT images pixel-exactly. Byte-deterministic in
// the seed.
DatasetManifest generate_synthetic_dataset(const SynthSpec& spec,
                                           const std::string& out_dir);

}  // namespace ccpv

#endif  // CCPV_DATASETS_HPP
