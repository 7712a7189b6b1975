#pragma once

#include <stdexcept>
#include <string>

namespace retexkit {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  io = 2,      // unreadable/unwritable files, malformed inputs on disk
  domain = 3,  // valid input that the procedure cannot use (empty foreground, ...)
  shape = 4,   // dimension or configuration mismatch
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

// Invalid parameter values share the shape/config exit code.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

}  // namespace retexkit
