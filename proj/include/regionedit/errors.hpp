#pragma once

#include <stdexcept>
#include <string>

namespace regionedit {

/// Unreadable/unwritable files, malformed images, bad manifests. CLI exit 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A model backend failed. `retryable` tells the trainer whether another
/// attempt with the same arguments can succeed. CLI exit 3.
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what, bool retryable = false)
        : std::runtime_error(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

}  // namespace regionedit
