#pragma once

#include <stdexcept>
#include <string>

namespace rotascore {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError -> 1, DataError -> 2, InternalCheckError -> 3.
// Library preconditions (shape mismatches, bad arguments) throw
// std::invalid_argument directly.

class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class InternalCheckError : public std::runtime_error {
public:
  explicit InternalCheckError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rotascore
