#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace senmfk {

enum class ErrorKind {
  EmptyCorpus,
  DuplicateId,
  EmptyVocabulary,
  DimensionMismatch,
  ShapeMismatch,
  EmptyColumn,
  InvalidRank,
  InvalidConfig,
  NonNegativityViolation,
  DegenerateMatrix,
  DegenerateBasis,
  NoStableRank,
  SingleCluster,
  Io,
  Parse,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NonNegativityViolation: return "NonNegativityViolation";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::NoStableRank: return "NoStableRank";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable kind. The message always starts
/// with the kind name so stage-labelled messages stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same error with a "[stage] " prefix on the message.
  Error with_stage(std::string_view stage) const {
    Error e(*this);
    e.staged_ = "[" + std::string(stage) + "] " + what();
    return e;
  }

  const char* what() const noexcept override {
    return staged_.empty() ? std::runtime_error::what() : staged_.c_str();
  }

 private:
  ErrorKind kind_;
  std::string staged_;
};

}  // namespace senmfk
