#pragma once

#include <stdexcept>
#include <string>

namespace circsketch {

// Precondition violated by the caller (bad length, alphabet, parameters).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two objects that must agree (lengths, schemes, overlapping entries) do not.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cubic extension ran past 2n + 1, which only happens for inputs in H_{n,k}.
class PseudoPeriodicityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or foreign serialized sketch.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace circsketch
