#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsmc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed model, formula, track or problem text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) +
                              (column == 0 ? "" : ", column " + std::to_string(column)) + ": " + what),
        line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// Structurally invalid Kripke structure or track.
class ModelError : public Error {
public:
  using Error::Error;
};

// Formula outside the fragment an operation accepts.
class FragmentError : public Error {
public:
  using Error::Error;
};

// A configured size or time ceiling would be exceeded.
class ResourceError : public Error {
public:
  using Error::Error;
};

} // namespace hsmc
