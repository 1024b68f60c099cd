#pragma once

#include <stdexcept>
#include <string>

namespace cade {

// Error categories map to CLI exit codes: validation -> 2, io -> 3, protocol -> 4.
enum class ErrorCode { Validation = 2, Io = 3, Protocol = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

struct UnknownIndicator : Error {
  explicit UnknownIndicator(const std::string& name)
      : Error(ErrorCode::Validation, "unknown indicator: " + name) {}
};

struct UnresolvableRegression : Error {
  explicit UnresolvableRegression(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

struct MalformedRecord : Error {
  explicit MalformedRecord(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

struct ProtocolError : Error {
  explicit ProtocolError(const std::string& what) : Error(ErrorCode::Protocol, what) {}
};

struct EndpointUnavailable : Error {
  explicit EndpointUnavailable(const std::string& what) : Error(ErrorCode::Protocol, what) {}
};

}  // namespace cade
