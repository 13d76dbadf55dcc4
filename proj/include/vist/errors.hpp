#pragma once

#include <stdexcept>
#include <string>

namespace vist {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or length disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf detected at a layer boundary, or a non-finite gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file or record.
class FormatError : public Error {
 public:
  enum class Kind { kCorrupt, kTruncated, kVersionMismatch, kDuplicate, kMalformed };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// A story references a photo id the embedding store does not hold.
class MissingEmbedding : public Error {
 public:
  explicit MissingEmbedding(const std::string& photo_id)
      : Error("missing embedding for photo id '" + photo_id + "'"), photo_id_(photo_id) {}

  const std::string& photo_id() const { return photo_id_; }

 private:
  std::string photo_id_;
};

}  // namespace vist
