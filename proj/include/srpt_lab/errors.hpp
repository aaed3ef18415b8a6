#ifndef SRPT_LAB_ERRORS_HPP
#define SRPT_LAB_ERRORS_HPP

#include <stdexcept>

namespace srpt_lab {

/// Raised when an argument lies outside an operation's domain.
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when the generalized inverse of S fails to bracket or converge.
class inversion_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised for an untracked threshold or an off-grid time.
class lookup_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class unsupported_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace srpt_lab

#endif // SRPT_LAB_ERRORS_HPP
