#ifndef BIOQA_ERROR_H_
#define BIOQA_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bioqa {

// Base class for every failure raised by the toolkit. The kind drives the
// CLI exit status, so each subclass maps to exactly one kind.
class Error : public std::runtime_error {
 public:
  enum class Kind { kParse, kSchema, kInvalidArgument, kIo, kDataMismatch };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Malformed JSON. byte_offset points at the offending input byte.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(Kind::kParse, message), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed JSON that does not follow the expected schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message)
      : Error(Kind::kSchema, message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(Kind::kInvalidArgument, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(Kind::kIo, message) {}
};

// Inputs that are individually valid but disagree with each other, e.g.
// prediction ids that do not exist in the golden file.
class DataMismatch : public Error {
 public:
  explicit DataMismatch(const std::string& message)
      : Error(Kind::kDataMismatch, message) {}
};

const char* KindName(Error::Kind kind);

}  // namespace bioqa

#endif  // BIOQA_ERROR_H_
