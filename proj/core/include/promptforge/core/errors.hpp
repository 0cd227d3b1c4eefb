#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace promptforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: bad JSONL records, unknown labels, unsatisfiable splits.
class DataError : public Error {
  public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    /// 1-based line number of the offending record, 0 when not applicable.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Invalid configuration or precondition violation on user-supplied settings.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A prompt does not fit the model's context window.
class TokenBudgetError : public Error {
  public:
    TokenBudgetError(std::size_t estimated, std::size_t limit)
        : Error("prompt needs an estimated " + std::to_string(estimated) + " tokens, limit is " +
                std::to_string(limit)),
          estimated_(estimated) {}

    [[nodiscard]] std::size_t estimated() const noexcept { return estimated_; }

  private:
    std::size_t estimated_;
};

/// Completion backend failure: transport, HTTP status, or a response that breaks the request contract.
class BackendError : public Error {
  public:
    explicit BackendError(const std::string& what, int status = 0) : Error(what), status_(status) {}

    /// HTTP status when the failure came from a response, 0 otherwise.
    [[nodiscard]] int status() const noexcept { return status_; }

  private:
    int status_;
};

} // namespace promptforge
