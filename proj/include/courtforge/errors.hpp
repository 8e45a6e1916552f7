#pragma once

#include <stdexcept>
#include <string>

namespace courtforge {

// Caller broke a precondition (invalid action for the phase, stale tape, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// User-supplied configuration or data failed validation.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Filesystem failure; the message always carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Checkpoint bytes are corrupt, truncated, or do not match the expected layout.
class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace courtforge
