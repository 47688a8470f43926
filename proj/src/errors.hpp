#pragma once

#include <stdexcept>
#include <string>

namespace iso {

// Common base so callers can catch everything from this library at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DivisionByZero : Error {
  explicit DivisionByZero(const std::string& what = "division by zero") : Error(what) {}
};

struct UnboundSymbol : Error {
  explicit UnboundSymbol(const std::string& what) : Error(what) {}
};

struct PoleHit : Error {
  explicit PoleHit(const std::string& what) : Error(what) {}
};

struct InvalidReading : Error {
  explicit InvalidReading(const std::string& what) : Error(what) {}
};

struct EmptyPart : Error {
  explicit EmptyPart(const std::string& what) : Error(what) {}
};

struct NotAdjacent : Error {
  explicit NotAdjacent(const std::string& what) : Error(what) {}
};

struct UnsupportedDegenerateReading : Error {
  explicit UnsupportedDegenerateReading(const std::string& what) : Error(what) {}
};

struct NotAnIMDCycle : Error {
  explicit NotAnIMDCycle(const std::string& what) : Error(what) {}
};

struct ZeroElement : Error {
  explicit ZeroElement(const std::string& what = "zero element has no order") : Error(what) {}
};

struct ResourceLimit : Error {
  explicit ResourceLimit(const std::string& what) : Error(what) {}
};

struct UnsupportedPair : Error {
  explicit UnsupportedPair(const std::string& what) : Error(what) {}
};

struct BadDimension : Error {
  explicit BadDimension(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct NotInvariant : Error {
  explicit NotInvariant(const std::string& what) : Error(what) {}
};

struct OrientationMismatch : Error {
  explicit OrientationMismatch(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace iso
