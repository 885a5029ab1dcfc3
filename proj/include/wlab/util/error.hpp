// Copyright 2026 The WriterLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace wlab {

/// Base of every error the library throws. `kind()` is a stable short tag
/// used in structured CLI error output.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define WLAB_DEFINE_ERROR(Name, tag)                                 \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  };

WLAB_DEFINE_ERROR(DimensionError, "dimension")
WLAB_DEFINE_ERROR(ShapeError, "shape")
WLAB_DEFINE_ERROR(DomainError, "domain")
WLAB_DEFINE_ERROR(IndexError, "index")
WLAB_DEFINE_ERROR(LengthError, "length")
WLAB_DEFINE_ERROR(ConfigError, "config")
WLAB_DEFINE_ERROR(ContractError, "contract")
WLAB_DEFINE_ERROR(StagingError, "staging")
WLAB_DEFINE_ERROR(DataError, "data")
WLAB_DEFINE_ERROR(IngestionError, "ingestion")
WLAB_DEFINE_ERROR(ParseError, "parse")
WLAB_DEFINE_ERROR(TransientError, "transient")
WLAB_DEFINE_ERROR(UnavailableError, "unavailable")
WLAB_DEFINE_ERROR(AlignmentError, "alignment")
WLAB_DEFINE_ERROR(TrainingError, "training")
WLAB_DEFINE_ERROR(IoError, "io")

#undef WLAB_DEFINE_ERROR

}  // namespace wlab
