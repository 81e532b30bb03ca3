#pragma once

#include <stdexcept>
#include <string>

namespace nvkerr {

/// Input outside an operation's mathematical or physical domain
/// (negative intensity, total internal reflection, nonpositive field, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A least-squares problem whose design matrix is rank deficient or
/// whose sampling cannot determine the requested parameters.
class IllPosedError : public std::runtime_error {
 public:
  explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed dataset or report file.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nvkerr
