#ifndef MUTGEN_ERROR_HPP
#define MUTGEN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mutgen {

/// Line/column of a form in its source text. Line 0 means "unknown".
struct SourcePos {
  int line = 0;
  int column = 0;

  bool known() const { return line > 0; }
  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// Base class for every user-facing error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message, SourcePos pos = {})
      : std::runtime_error(message), pos_(pos) {}

  SourcePos pos() const { return pos_; }
  bool has_pos() const { return pos_.known(); }

 private:
  SourcePos pos_;
};

/// Malformed surface syntax.
class ReadError : public Error {
 public:
  using Error::Error;
};

/// A well-formed S-expression that does not have the shape an operation
/// requires (bad clique, bad rule, bad defret, ...).
class FormError : public Error {
 public:
  using Error::Error;
};

/// Failure while running a term under the evaluator.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mutgen

#endif  // MUTGEN_ERROR_HPP
