#include "mevattr/numeric.hpp"

namespace mevattr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::BrokenCycle: return "BrokenCycle";
    case ErrorCode::MissingPool: return "MissingPool";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::UnknownHash: return "UnknownHash";
    case ErrorCode::MissingPrice: return "MissingPrice";
    case ErrorCode::NotACycle: return "NotACycle";
    case ErrorCode::TooManyCandidates: return "TooManyCandidates";
    case ErrorCode::MismatchedEvent: return "MismatchedEvent";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GroundTruthMismatch: return "GroundTruthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Int parse_int(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (!text.empty() && text[0] == '-') {
    negative = true;
    i = 1;
  }
  if (i == text.size()) {
    throw Error(ErrorCode::ParseError, "empty integer literal");
  }
  Int value = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::ParseError, "invalid integer literal '" + std::string(text) + "'");
    }
    value *= 10;
    value += c - '0';
  }
  return negative ? Int(-value) : value;
}

std::string to_decimal(const Int& value) { return value.str(); }

Rational make_rational(const Int& num, const Int& den) {
  if (den == 0) {
    throw Error(ErrorCode::InvalidArgument, "zero denominator");
  }
  // Boost rejects negative denominators outright.
  return den < 0 ? Rational(-num, -den) : Rational(num, den);
}

std::string to_string(const Rational& r) {
  const Int den = denominator_of(r);
  if (den == 1) {
    return numerator_of(r).str();
  }
  return numerator_of(r).str() + "/" + den.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Int isqrt(const Int& v) {
  if (v < 0) {
    throw Error(ErrorCode::InvalidArgument, "isqrt of negative value");
  }
  return boost::multiprecision::sqrt(v);
}

}  // namespace mevattr
