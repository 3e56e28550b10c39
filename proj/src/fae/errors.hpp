#pragma once

#include <stdexcept>
#include <string>

namespace fae {

// Error families. Values double as CLI exit codes and C API status codes.
enum class ErrorFamily : int {
  config = 2,
  data = 3,
  format = 4,
  numeric = 5,
  io = 6,
  shape = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, const std::string& msg)
      : std::runtime_error(msg), family_(family) {}
  ErrorFamily family() const { return family_; }

 private:
  ErrorFamily family_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorFamily::config, msg) {}
};
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(ErrorFamily::data, msg) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& msg) : Error(ErrorFamily::format, msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorFamily::numeric, msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorFamily::io, msg) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(ErrorFamily::shape, msg) {}
};

}  // namespace fae
