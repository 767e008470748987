#pragma once

#include <stdexcept>
#include <string>

namespace oxiscan {

// Bad or unusable input data / configuration. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal invariant (cross-reference mismatch, impossible state).
// Always a bug, never the caller's fault. The CLI maps this to exit code 2.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace oxiscan
