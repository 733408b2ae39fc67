#pragma once

#include <stdexcept>
#include <string>

namespace pdn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class TruncatedData : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for the given data (e.g. zero variance).
class DegenerateStatistic : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf appeared where finite values are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdn
