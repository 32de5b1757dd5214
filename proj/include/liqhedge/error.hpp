// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace liqhedge {

/// Base for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (x_T <= 0, p not in (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input that violates a documented invariant (crossed quote, duplicate id, bad config value).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed quote file or config file. Carries the 1-based line number when known.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A position outside the [-bid_depth, ask_depth] box.
class DepthViolation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Claim kind not supported by an operation (e.g. static replication of a digital).
class UnsupportedClaim : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The optimizer failed to produce a usable point.
class SolverFailure : public Error {
public:
    using Error::Error;
};

/// A hedging LP without a feasible point. [region_lo, region_hi] brackets the
/// underlying levels whose dominance constraints could not be met.
class InfeasibleHedge : public Error {
public:
    InfeasibleHedge(const std::string& what, double region_lo, double region_hi)
        : Error(what), region_lo_(region_lo), region_hi_(region_hi) {}

    [[nodiscard]] double region_lo() const noexcept { return region_lo_; }
    [[nodiscard]] double region_hi() const noexcept { return region_hi_; }

private:
    double region_lo_;
    double region_hi_;
};

/// Indifference price could not be bracketed.
class Unpriceable : public Error {
public:
    using Error::Error;
};

}  // namespace liqhedge
