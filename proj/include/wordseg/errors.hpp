#pragma once

#include <stdexcept>
#include <string>

namespace wordseg {

// Error taxonomy shared by the whole library. The C API maps each class to a
// status code; everything else propagates as exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform (messages name both shapes).
struct DimensionError : Error {
  using Error::Error;
};

// A precondition of an operation was violated by the caller.
struct ContractError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Invalid UTF-8 in an input file.
struct EncodingError : Error {
  using Error::Error;
};

// Malformed line in a structured text file (embeddings, etc).
struct ParseError : Error {
  using Error::Error;
};

// Bad magic / malformed model file.
struct FormatError : Error {
  using Error::Error;
};

// Model file written by an unsupported format version.
struct VersionError : FormatError {
  using FormatError::FormatError;
};

// Model file payload does not match its checksum or declared length.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace wordseg
