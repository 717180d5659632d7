// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_COMMON_HPP
#define CCPV_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ccpv {

// Every failure mode surfaced by the library. The CLI maps these 1:1 onto
// process exit codes, so the order is part of the external contract and new
// codes may only be appended.
enum class ErrorCode {
  Usage = 0,
  Io,
  MissingColumn,
  UnknownChirality,
  IdentityWithoutBothHands,
  InsufficientSamples,
  BatchTooLarge,
  DegenerateImage,
  UnknownArch,
  ShapeMismatch,
  DimMismatch,
  LabelOutOfRange,
  DegenerateBatch,
  NonFiniteLoss,
  ZeroNormTemplate,
  DuplicateIdentity,
  UnknownIdentity,
  EmptyGallery,
  EmptyProtocolSelection,
  EmptyScores,
  EmptyInput,
  InvalidFrameworkData,
  ProtocolDataMissing,
  BadFormat,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// SplitMix64 step; used to derive decorrelated stream seeds from a master
// seed so per-image / per-step randomness is independent of processing order.
std::uint64_t mix64(std::uint64_t x);

// Combines a master seed with up to three salts into a stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
  return Rng(derive_seed(seed, a, b, c));
}

}  // namespace ccpv

#endif  // CCPV_COMMON_HPP
