#pragma once

#include <stdexcept>
#include <string>

namespace partbelief {

// Malformed input document (JSON syntax, missing or mistyped fields).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a model or evidence invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Net shape violations: second parent, cycles, table/node shape mismatch.
class StructureError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Posted evidence and priors admit no consistent assignment at some node.
class InconsistencyError : public std::runtime_error {
public:
    InconsistencyError(std::string node, const std::string& what)
        : std::runtime_error(what), node_(std::move(node)) {}
    const std::string& node() const noexcept { return node_; }

private:
    std::string node_;
};

// A belief was read from a net that changed since the last propagate().
class StaleBeliefError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Axis (nearly) parallel to the line of sight: the projection is a point.
class DegenerateViewpointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace partbelief
