#pragma once

#include <stdexcept>
#include <string>

namespace fc2t {

// Precondition violations on numeric/domain inputs (non-finite values, t <= 0, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by parse_number; carries the token that could not be interpreted.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::string token)
      : std::runtime_error("cannot parse number: '" + token + "'"), token_(std::move(token)) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

}  // namespace fc2t
