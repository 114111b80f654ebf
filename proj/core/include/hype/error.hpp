#pragma once

#include <stdexcept>
#include <string>

#include "hype/source.hpp"

namespace hype {

/// Base class of every exception thrown by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Expression evaluation failed (unknown name, division by zero, type mismatch).
class EvalError : public Error {
  public:
    using Error::Error;
};

/// A model violates a structural rule; carries the location of the construct.
class ModelError : public Error {
  public:
    ModelError(const std::string& message, SourceSpan span = {})
        : Error(message), span_(std::move(span)) {}

    [[nodiscard]] const SourceSpan& span() const noexcept { return span_; }

  private:
    SourceSpan span_;
};

/// Product or compilation could not be carried out.
class CompileError : public Error {
  public:
    using Error::Error;
};

/// Caller passed arguments outside an operation's domain.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

} // namespace hype
