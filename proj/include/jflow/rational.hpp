#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace jflow {

namespace detail {
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using BigRat =
    boost::multiprecision::number<boost::multiprecision::rational_adaptor<
                                      boost::multiprecision::cpp_int_backend<>>,
                                  boost::multiprecision::et_off>;
}  // namespace detail

/// Exact arbitrary-precision rational, always in lowest terms with positive
/// denominator. Deliberately exposes only a narrow constructor set so it can
/// serve as an Eigen scalar type.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(int n) : v_(n) {}
  Rational(long long n) : v_(n) {}
  Rational(long long num, long long den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    detail::BigInt n(num), d(den);
    if (d < 0) {
      n = -n;
      d = -d;
    }
    v_ = detail::BigRat(n, d);
  }
  explicit Rational(detail::BigRat v) : v_(std::move(v)) {}

  static Rational fromString(const std::string& s);

  const detail::BigRat& raw() const { return v_; }
  detail::BigInt num() const { return boost::multiprecision::numerator(v_); }
  detail::BigInt den() const { return boost::multiprecision::denominator(v_); }

  int sign() const { return v_.sign(); }
  bool isZero() const { return v_.is_zero(); }
  bool isInteger() const { return den() == 1; }

  double toDouble() const { return v_.convert_to<double>(); }
  std::string str() const;

  Rational operator-() const { return Rational(-v_); }

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.isZero()) throw std::domain_error("Rational: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  detail::BigRat v_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

inline Rational pow(Rational base, unsigned exp) {
  Rational out(1);
  while (exp > 0) {
    if (exp & 1u) out *= base;
    base *= base;
    exp >>= 1u;
  }
  return out;
}

/// Parses "p", "-p/q" or "p/q". Whitespace is not accepted; q must be nonzero.
inline Rational Rational::fromString(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("Rational: empty string");
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(detail::BigRat(detail::BigInt(s)));
    }
    detail::BigInt num(s.substr(0, slash));
    detail::BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::domain_error("Rational: zero denominator in \"" + s + "\"");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    return Rational(detail::BigRat(num, den));
  } catch (const std::domain_error&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("Rational: cannot parse \"" + s + "\"");
  }
}

inline std::string Rational::str() const {
  std::string out = num().str();
  if (den() != 1) {
    out += '/';
    out += den().str();
  }
  return out;
}

}  // namespace jflow

namespace Eigen {

template <>
struct NumTraits<jflow::Rational> : GenericNumTraits<jflow::Rational> {
  typedef jflow::Rational Real;
  typedef jflow::Rational NonInteger;
  typedef jflow::Rational Nested;

  static inline Real epsilon() { return jflow::Rational(0); }
  static inline Real dummy_precision() { return jflow::Rational(0); }
  static inline int digits10() { return 0; }

  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 60,
    MulCost = 60
  };
};

}  // namespace Eigen
