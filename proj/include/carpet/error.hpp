#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carpet {

enum class ErrorKind {
    invalid_argument,
    invalid_tiling,
    parse,
    validation,
    graph_disconnected,
    no_convergence,
    breakpoint,
    topology,
    fewer_rings,
    mismatch,
    io,
};

[[nodiscard]] inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::invalid_tiling: return "invalid-tiling";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::graph_disconnected: return "graph-disconnected";
        case ErrorKind::no_convergence: return "no-convergence";
        case ErrorKind::breakpoint: return "breakpoint";
        case ErrorKind::topology: return "topology";
        case ErrorKind::fewer_rings: return "fewer-rings";
        case ErrorKind::mismatch: return "mismatch";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it to a stage message and an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace carpet
