#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dare {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Illegal CSR value, bad experiment config, bad LLC geometry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Memory access outside the mapped image or past the 48-bit address space.
class FaultError : public Error {
 public:
  FaultError(const std::string& what, uint64_t instr_id)
      : Error(what + " (instruction " + std::to_string(instr_id) + ")"), instr_id_(instr_id) {}
  explicit FaultError(const std::string& what) : Error(what) {}

  uint64_t instr_id() const { return instr_id_; }

 private:
  uint64_t instr_id_ = UINT64_MAX;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Command-line or config contradiction detected by the harness.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Timed architectural output differed from the functional golden run.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dare
