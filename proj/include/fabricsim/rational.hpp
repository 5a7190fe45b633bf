#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fabricsim {

// Exact fraction on 64-bit integers. Port-count arithmetic (NSR/UDF
// identities) stays far below overflow for any physical switch radix.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }
  static Rational whole(long long n) { return Rational(n, 1); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }

  Rational operator/(const Rational& o) const {
    if (o.num == 0) throw std::invalid_argument("Rational: division by zero");
    return Rational(num * o.den, den * o.num);
  }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

}  // namespace fabricsim
