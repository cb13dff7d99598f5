#pragma once

#include <stdexcept>
#include <string>

namespace tripcast {

// Failure classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  kConfig,             // exit 2
  kMissingDependency,  // exit 3
  kData,               // exit 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class MissingArtifactError : public Error {
 public:
  MissingArtifactError(std::string stage, const std::string& what)
      : Error(ErrorKind::kMissingDependency, what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

}  // namespace tripcast
