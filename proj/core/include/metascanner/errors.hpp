#pragma once

#include <stdexcept>
#include <string>

namespace metascanner {

/// Base of every error raised by the scanner library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document. `file` names the source document and `location`
/// is either a byte offset ("byte 17") or a JSON pointer ("/nodes/3/id").
class ParseError : public Error {
 public:
  ParseError(std::string file, std::string location, const std::string& what)
      : Error(file + ": " + location + ": " + what),
        file_(std::move(file)),
        location_(std::move(location)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& location() const noexcept { return location_; }

 private:
  std::string file_;
  std::string location_;
};

/// Well-formed document that violates a semantic invariant
/// (dangling reference, duplicate id, cycle, unknown key, range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// QR codec failures.

class FormatInfoError : public Error {
 public:
  using Error::Error;
};

class SyndromeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFeature : public Error {
 public:
  using Error::Error;
};

}  // namespace metascanner
