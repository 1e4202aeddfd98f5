#pragma once

#include <stdexcept>
#include <string>

namespace pairpol {

//! Normal equations of a least-squares fit are singular or underdetermined.
class FitDegenerateError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! A correlation coefficient has a zero denominator.
class UndefinedCorrelationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Configuration text could not be parsed or failed validation.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Reading or writing an input/output file failed.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace pairpol
