#pragma once

#include <stdexcept>
#include <string>

namespace dcleo {

/// Malformed input text (case file, config, QP dump).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input parsed but breaks a model invariant (dangling bus id, bad reactance, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical stage failed: singular network, infeasible program, rank-deficient fit.
class SolverError : public std::runtime_error {
public:
    SolverError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace dcleo
