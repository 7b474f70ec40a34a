/**
 * @file error.h
 * @brief Exception types and warning collection shared by every module.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace motifrep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated MIDI data. offset() is the byte position of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedMeterError : public Error {
 public:
  UnsupportedMeterError(int numerator, int denominator)
      : Error("unsupported meter " + std::to_string(numerator) + "/" + std::to_string(denominator) +
              ", only 4/4 is supported"),
        numerator_(numerator),
        denominator_(denominator) {}
  int numerator() const { return numerator_; }
  int denominator() const { return denominator_; }

 private:
  int numerator_;
  int denominator_;
};

/// Token outside its attribute vocabulary.
class VocabularyError : public Error {
 public:
  VocabularyError(int row, int attribute, int token);
  int row() const { return row_; }
  int attribute() const { return attribute_; }
  int token() const { return token_; }

 private:
  int row_;
  int attribute_;
  int token_;
};

/// Shape or version mismatch when loading a checkpoint, or a corrupt file.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// JSON document does not follow the expected schema. path() names the offending field.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Training produced a non-finite loss.
/// Well-formed input that is musically invalid (empty motif, unknown label, bad transposition).
class ValidityError : public Error {
 public:
  ValidityError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Collects non-fatal warnings (unterminated notes, truncation, clamping).
class Diagnostics {
 public:
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool empty() const { return warnings_.empty(); }
  void clear() { warnings_.clear(); }

 private:
  std::vector<std::string> warnings_;
};

}  // namespace motifrep
