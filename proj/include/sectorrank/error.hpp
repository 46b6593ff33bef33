#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sectorrank {

enum class ErrorKind {
  // files and formats
  Io,
  MalformedRow,
  EmptyField,
  DuplicatePair,
  JsonSyntax,
  BadHeader,
  // corpus
  UnknownSector,
  DuplicateId,
  DateYearMismatch,
  InvalidDate,
  InvalidSplit,
  // embeddings
  DimensionMismatch,
  NonFiniteValue,
  ZeroNorm,
  MissingSectorVector,
  MissingVector,
  EmptyBatch,
  TrainingDiverged,
  InvalidConfig,
  // classifier
  MissingPrediction,
  UnknownSegment,
  // market
  NonPositivePrice,
  DuplicateEntry,
  UnknownCompany,
  NoLaterDate,
  NoUsableCompanies,
  MixedDates,
  DuplicateSector,
  // ranker
  NoSegments,
  SingleClass,
  Diverged,
  NoPairs,
  SectorSetMismatch,
  BadModel,
  // llm client
  EmptyTranscript,
  EmptyExcerpt,
  NotJson,
  WrongShape,
  NotANumber,
  OutOfRange,
  Transport,
  HttpStatus,
  AuthMissing,
  Timeout,
};

std::string_view to_string(ErrorKind kind);

/// The single exception type thrown by the library. `kind()` identifies the
/// contract violation; `what()` carries file/line context where available.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace sectorrank
