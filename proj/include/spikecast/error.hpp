#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spikecast {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool retryable = false)
        : std::runtime_error(what), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

// A value broke a type invariant. `field()` names the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error("precondition: " + what) {}
};

// File or network failure; callers may retry.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io: " + what, true) {}
};

// LLM / embedder / retriever failures.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what, bool retryable = true)
        : Error("backend: " + what, retryable) {}
};

// Stub backend asked for a prompt it has no fixture for.
class MissingFixtureError : public BackendError {
public:
    explicit MissingFixtureError(std::string prompt_hash)
        : BackendError("no stub fixture for prompt hash " + prompt_hash, false),
          hash_(std::move(prompt_hash)) {}

    const std::string& prompt_hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

}  // namespace spikecast
