#ifndef ELPARETO_ERRORS_HPP
#define ELPARETO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace elp {

// Error taxonomy mirrored by the C API status codes.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IterationCap : std::runtime_error {
  explicit IterationCap(const std::string& msg) : std::runtime_error(msg) {}
};

struct RejectionCap : std::runtime_error {
  explicit RejectionCap(const std::string& msg) : std::runtime_error(msg) {}
};

struct ThresholdTooLow : std::runtime_error {
  explicit ThresholdTooLow(const std::string& msg) : std::runtime_error(msg) {}
};

struct TooFewExceedances : std::runtime_error {
  explicit TooFewExceedances(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptySample : std::runtime_error {
  explicit EmptySample(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonConvergence : std::runtime_error {
  explicit NonConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

struct Unattainable : std::invalid_argument {
  explicit Unattainable(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace elp

#endif
