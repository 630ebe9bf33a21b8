#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvskit {

// Base for every data-level failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. `line` is 1-based; 0 means "not line oriented"
// (binary payloads), in which case `offset` carries the byte position.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}
  ParseError(const std::string& path, std::size_t line, std::size_t offset, const std::string& what)
      : Error(path + ": byte " + std::to_string(offset) + ": " + what),
        path_(path), line_(line), offset_(offset) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string path_;
  std::size_t line_ = 0;
  std::size_t offset_ = 0;
};

#define MVSKIT_CHECK(cond, msg)                 \
  do {                                          \
    if (!(cond)) throw ::mvskit::Error(msg);    \
  } while (0)

}  // namespace mvskit
