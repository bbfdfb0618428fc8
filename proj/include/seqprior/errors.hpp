#ifndef SEQPRIOR_ERRORS_HPP_
#define SEQPRIOR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace seqprior {

// Parameter or observation outside the declared open domain.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Sample falls outside the event on which the MLE exists.
class MleUndefinedError : public std::runtime_error {
 public:
  explicit MleUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

// Operation not defined for the given model instance or rule kind.
class UnsupportedError : public std::invalid_argument {
 public:
  explicit UnsupportedError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical procedure failed to meet its tolerance or truncation bound.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seqprior

#endif  // SEQPRIOR_ERRORS_HPP_
