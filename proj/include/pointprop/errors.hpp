#pragma once

#include <stdexcept>
#include <string>

namespace pointprop {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SizeMismatch : public Error {
  public:
    using Error::Error;
};

class EmptyInput : public Error {
  public:
    using Error::Error;
};

class EmptyMask : public Error {
  public:
    using Error::Error;
};

class EmptyBackground : public Error {
  public:
    using Error::Error;
};

class EmptySeedSet : public Error {
  public:
    using Error::Error;
};

class NoConvergence : public Error {
  public:
    using Error::Error;
};

class SingularSystem : public Error {
  public:
    using Error::Error;
};

class InvalidThresholds : public Error {
  public:
    using Error::Error;
};

class OverlapError : public Error {
  public:
    using Error::Error;
};

class NotDivisible : public Error {
  public:
    using Error::Error;
};

class OutOfWindow : public Error {
  public:
    using Error::Error;
};

class NonFinite : public Error {
  public:
    using Error::Error;
};

class PlacementFailure : public Error {
  public:
    using Error::Error;
};

class DivisionByZero : public Error {
  public:
    using Error::Error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// File format errors.
class BadMagic : public Error {
  public:
    using Error::Error;
};

class TruncatedFile : public Error {
  public:
    using Error::Error;
};

class BadDimensions : public Error {
  public:
    using Error::Error;
};

class NegativeEntry : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace pointprop
