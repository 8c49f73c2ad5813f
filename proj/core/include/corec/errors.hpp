#pragma once

#include <stdexcept>
#include <string>

namespace corec {

// A consumer-side tail write broke the single-coherent-consumer contract the
// NIC expects: the released range was not contiguous from the current tail,
// a slot still had DD set, or a slot was returned without a replacement
// buffer. Always an algorithm bug, never a load condition.
class TransparencyViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// bulk_alloc could not reserve the requested count; the pool is unchanged.
class PoolExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A buffer handle was freed while not allocated.
class DoubleFree : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NotPowerOfTwo : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Queueing model parameter errors.
class InvalidRate : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// rho >= 1: the queueing system has no steady state.
class Unstable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Metrics input errors.
class DuplicateSeq : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingTimestamp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace corec
