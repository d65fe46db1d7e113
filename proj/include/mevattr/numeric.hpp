#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace mevattr {

/// Arbitrary-width signed integer; reserves and amounts are in smallest token units.
using Int = boost::multiprecision::cpp_int;
/// Exact rational used for prices, coefficients and profits.
using Rational = boost::multiprecision::cpp_rational;

enum class ErrorCode {
  UnknownToken,
  EmptyPool,
  BrokenCycle,
  MissingPool,
  PositionOutOfRange,
  UnknownHash,
  MissingPrice,
  NotACycle,
  TooManyCandidates,
  MismatchedEvent,
  InfeasibleSpec,
  ParseError,
  GroundTruthMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parses a non-empty run of decimal digits with an optional leading '-'.
Int parse_int(std::string_view text);
std::string to_decimal(const Int& value);

Rational make_rational(const Int& num, const Int& den);
inline Int numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Int denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

/// "num/den" in lowest terms, or just "num" when den == 1.
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// floor(sqrt(v)) for v >= 0.
Int isqrt(const Int& v);

}  // namespace mevattr
