#pragma once

#include <stdexcept>
#include <string>

namespace insulopt {

// Malformed input file (mesh or config); carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// A structurally well-formed input that violates a mesh invariant
// (negative triangle area, inconsistent boundary, ...).
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace insulopt
