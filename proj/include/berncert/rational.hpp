#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace berncert {

// Exact fraction with a positive denominator, always stored in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Parses "2/3", "0.6667", "1", "5e-3" into an exact rational. Decimal strings
// are read digit by digit, so "0.6667" becomes 6667/10000 with no rounding.
// Throws std::invalid_argument on malformed text.
Rational parse_rational(std::string_view text);

// A significance level that is either an exact fraction or a binary double.
// All comparisons against p-values are exact in both representations.
class Significance {
 public:
  Significance(Rational r) : value_(r) {}
  Significance(double d) : value_(d) {}
  Significance(int i) : value_(Rational(i)) {}

  bool is_exact() const { return std::holds_alternative<Rational>(value_); }
  double value() const;
  std::string str() const;

  // true iff p > level
  bool exceeded_by(const Rational& p) const;
  // floor(level * m) for m >= 0
  std::int64_t floor_times(std::int64_t m) const;

  bool in_unit_interval() const;
  bool is_one() const;

 private:
  std::variant<Rational, double> value_;
};

}  // namespace berncert
