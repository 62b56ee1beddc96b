#pragma once

#include <stdexcept>
#include <string>

namespace gfte {

// Exit-code contract shared by the CLI: 0 success, 1 usage/config, 2 data, 3 numeric.
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(ErrorKind::Usage, msg) {}
};

struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(ErrorKind::Data, msg) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorKind::Numeric, msg) {}
};

}  // namespace gfte
