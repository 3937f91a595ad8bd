#pragma once

#include <stdexcept>
#include <string>

namespace regradius {

/// Error categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    not_on_graph,
    construction,
    unsupported,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace regradius
