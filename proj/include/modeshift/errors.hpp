#pragma once

#include <stdexcept>
#include <string>

namespace modeshift {

// Common base so the CLI can catch every toolkit failure in one place.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NoAvailableMode : public Error {
public:
  using Error::Error;
};

class EmptyNest : public Error {
public:
  using Error::Error;
};

class InvalidModel : public Error {
public:
  using Error::Error;
};

class EmptyCell : public Error {
public:
  using Error::Error;
};

class UnknownVariable : public Error {
public:
  using Error::Error;
};

class DegenerateVariance : public Error {
public:
  using Error::Error;
};

class MissingAttribute : public Error {
public:
  using Error::Error;
};

class Nonidentifiable : public Error {
public:
  using Error::Error;
};

class InvalidNull : public Error {
public:
  using Error::Error;
};

class ZeroCostCoefficient : public Error {
public:
  using Error::Error;
};

class NonpositiveVot : public Error {
public:
  using Error::Error;
};

class DegenerateBase : public Error {
public:
  using Error::Error;
};

class ReferenceModeUnavailable : public Error {
public:
  using Error::Error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

// File-level failures (parse errors, bad schemas); message carries file and
// line/field context where available.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace modeshift
