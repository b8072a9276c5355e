#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bootseq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something the operation's precondition forbids.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A named entity (application, file, symbol) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MemoryBudgetExceeded : public Error {
 public:
  MemoryBudgetExceeded(std::size_t required, std::size_t available)
      : Error("alignment matrix needs " + std::to_string(required) + " cells, budget is " +
              std::to_string(available)),
        required_(required),
        available_(available) {}
  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t required_;
  std::size_t available_;
};

}  // namespace bootseq
