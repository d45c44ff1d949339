#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prestage {

// Base of every recoverable error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// census index
struct MalformedFips : Error { using Error::Error; };
struct DuplicateFips : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct GeometryOutOfBbox : Error { using Error::Error; };

// boundary bundle ingestion
struct SyntaxError : Error {
  std::size_t byte_offset;
  SyntaxError(const std::string& msg, std::size_t offset)
      : Error(msg), byte_offset(offset) {}
};
struct SchemaError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct DanglingReference : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };

// coordinate conversion and colormaps
struct RangeError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

// emitters
struct EmptyCounty : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct FormulaError : Error { using Error::Error; };

// batch generation
struct OutputRootUnwritable : Error { using Error::Error; };

}  // namespace prestage
