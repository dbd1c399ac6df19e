#pragma once

#include <stdexcept>
#include <string>

namespace macrodimer {

// All library errors derive from Error so the CLI can categorize them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "invalid-argument"; }
};

class SingularGeometry : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "singular-geometry"; }
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "grid-too-coarse"; }
};

class ContinuationLost : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "continuation-lost"; }
};

class IntegratorError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "integrator"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

}  // namespace macrodimer
