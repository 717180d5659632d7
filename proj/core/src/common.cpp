// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/common.hpp"

namespace ccpv {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownChirality: return "UnknownChirality";
    case ErrorCode::IdentityWithoutBothHands: return "IdentityWithoutBothHands";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::BatchTooLarge: return "BatchTooLarge";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::UnknownArch: return "UnknownArch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ZeroNormTemplate: return "ZeroNormTemplate";
    case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
    case ErrorCode::UnknownIdentity: return "UnknownIdentity";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::EmptyProtocolSelection: return "EmptyProtocolSelection";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidFrameworkData: return "InvalidFrameworkData";
    case ErrorCode::ProtocolDataMissing: return "ProtocolDataMissing";
    case ErrorCode::BadFormat: return "BadFormat";
  }
  return "Unknown";
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(a));
  s = mix64(s ^ mix64(b));
  s = mix64(s ^ mix64(c));
  return s;
}

}  // namespace ccpv
