#pragma once

#include <stdexcept>
#include <string>

namespace chessmix {

// Exit-code categories surfaced by the CLI.
enum class ErrorKind { config = 1, dataset = 2, generation = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DatasetError : Error {
  explicit DatasetError(const std::string& what) : Error(ErrorKind::dataset, what) {}
};

struct GenerationError : Error {
  explicit GenerationError(const std::string& what) : Error(ErrorKind::generation, what) {}
};

}  // namespace chessmix
