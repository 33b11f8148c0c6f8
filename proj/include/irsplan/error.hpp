// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace irsplan
{

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration text. Carries the 1-based line when known (0 otherwise).
class ParseError : public Error
{
public:
    ParseError(const std::string &what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

/// A value is well-formed but breaks a documented invariant; `field` names it.
class InvariantError : public Error
{
public:
    InvariantError(const std::string &field, const std::string &what)
        : Error(field + ": " + what), field_(field)
    {
    }
    const std::string &field() const { return field_; }

private:
    std::string field_;
};

class DomainError : public Error
{
public:
    using Error::Error;
};

class DegenerateError : public Error
{
public:
    using Error::Error;
};

class NoPathError : public Error
{
public:
    using Error::Error;
};

/// Neither initial trajectory meets the rate requirement.
class InfeasibleError : public Error
{
public:
    InfeasibleError(const std::string &what, double me_rate, double mr_rate)
        : Error(what), me_rate_(me_rate), mr_rate_(mr_rate)
    {
    }
    double me_rate() const { return me_rate_; }
    double mr_rate() const { return mr_rate_; }

private:
    double me_rate_;
    double mr_rate_;
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace irsplan
