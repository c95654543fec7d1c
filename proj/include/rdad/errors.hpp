#pragma once

#include <stdexcept>
#include <string>

namespace rdad {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure failed (non-convergence, loss of definiteness, overflow).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A result that the underlying theory guarantees was not obtained.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace detail
}  // namespace rdad
