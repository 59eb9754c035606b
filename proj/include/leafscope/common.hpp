#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafscope {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline const Complex kI{0.0, 1.0};

// Relative singular-value gap that separates the "zero" group from the
// "nonzero" group in every rank decision.  Below this the decision is
// reported as ambiguous instead of guessed.
inline constexpr double kRankGapRule = 1.0e3;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver or fit failure: a residual or spectrum did not meet its tolerance.
class NumericFailure : public Error {
public:
    explicit NumericFailure(const std::string& msg) : Error(msg) {}
};

class NotDivisorPair : public Error {
public:
    explicit NotDivisorPair(const std::string& msg) : Error(msg) {}
};

class RejectionBudgetExhausted : public Error {
public:
    explicit RejectionBudgetExhausted(const std::string& msg) : Error(msg) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& msg) : Error(msg) {}
};

class BadInput : public Error {
public:
    explicit BadInput(const std::string& msg) : Error(msg) {}
};

std::size_t thread_budget();

// Runs fn(i) for i in [0, count).  Splits into contiguous chunks across at
// most LEAFSCOPE_THREADS workers; runs inline when the budget is 1.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace leafscope
