// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace chaoskit
{

/// Raised when a caller violates an operation's precondition.
class PreconditionError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values produced by user-supplied model callbacks.
class NumericalError : public PreconditionError
{
  public:
    using PreconditionError::PreconditionError;
};

/// A declared rate bound (thinning envelope) was exceeded at runtime.
class BoundViolation : public PreconditionError
{
  public:
    using PreconditionError::PreconditionError;
};

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw PreconditionError(what);
}

}  // namespace chaoskit
