// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hydroptic {

// Error categories map 1:1 onto the CLI exit codes.
enum class ErrorKind { Io = 1, Parse = 2, Invariant = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_io(const std::string& msg) {
    throw Error(ErrorKind::Io, msg);
}

[[noreturn]] inline void throw_parse(const std::string& msg) {
    throw Error(ErrorKind::Parse, msg);
}

[[noreturn]] inline void throw_invariant(const std::string& msg) {
    throw Error(ErrorKind::Invariant, msg);
}

} // namespace hydroptic
