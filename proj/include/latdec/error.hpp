#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latdec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lattice invariant violated or an operation referenced a node it may not touch.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by MeteredScorer when the model-call budget is spent. Search loops
// treat this as a termination signal.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("model-call budget exhausted") {}
};

// Transport or protocol failure talking to a scoring model. `payload` carries
// the raw response line when there was one.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}
  const std::string& payload() const noexcept { return payload_; }

 private:
  std::string payload_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what + " (at byte " + std::to_string(location) + ")"), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

}  // namespace latdec
