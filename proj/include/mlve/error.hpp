#pragma once

#include <stdexcept>
#include <string>

namespace mlve {

/// Raised when an exhaustive enumeration or expansion order exceeds the
/// configured desk-scale budget.
class BudgetError : public std::length_error {
public:
    explicit BudgetError(const std::string& what) : std::length_error(what) {}
};

/// Raised when a computation cannot be certified (e.g. quadrature that does
/// not self-converge under node doubling).
class ReliabilityError : public std::runtime_error {
public:
    explicit ReliabilityError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail
} // namespace mlve
