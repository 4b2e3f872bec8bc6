#pragma once

#include <stdexcept>
#include <string>

namespace evcs {

// Argument outside the supported range (ground-set size, subset relation, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requested levels or contrasts cannot be realized.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A construction's hypothesis does not hold for the given input.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The improved construction has no qualifying even subset; fall back to Droste.
class NotApplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Search refused: the instance is above the size gate.
class TractabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A table fails a scheme condition where a verified one was required.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input documents or images.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evcs
