#include "berncert/rational.hpp"

#include <cctype>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace berncert {

namespace {

__extension__ typedef __int128 i128;

std::int64_t pow10_checked(int k) {
  std::int64_t out = 1;
  for (int i = 0; i < k; ++i) {
    if (out > std::numeric_limits<std::int64_t>::max() / 10) {
      throw std::invalid_argument("too many digits in decimal number");
    }
    out *= 10;
  }
  return out;
}

// Sign of (a - b*c) where a, c are integers exactly representable as doubles
// and b is an arbitrary finite double. Uses the exact two-product b*c = p + e.
int sign_of_int_minus_product(double a, double b, double c) {
  const double p = b * c;
  const double e = std::fma(b, c, -p);
  const double d = a - p;
  if (d > e) return 1;
  if (d < e) return -1;
  return 0;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = numerator / (g == 0 ? 1 : g);
  den_ = denominator / (g == 0 ? 1 : g);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const i128 lhs = static_cast<i128>(a.num_) * b.den_;
  const i128 rhs = static_cast<i128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty number");

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational a = parse_rational(text.substr(0, slash));
    const Rational b = parse_rational(text.substr(slash + 1));
    if (b.num() == 0) throw std::invalid_argument("fraction with zero denominator");
    i128 n = static_cast<i128>(a.num()) * b.den();
    i128 d = static_cast<i128>(a.den()) * b.num();
    i128 x = n < 0 ? -n : n;
    i128 y = d < 0 ? -d : d;
    while (y != 0) {
      const i128 t = x % y;
      x = y;
      y = t;
    }
    if (x > 1) {
      n /= x;
      d /= x;
    }
    if (n > std::numeric_limits<std::int64_t>::max() || n < std::numeric_limits<std::int64_t>::min() ||
        d > std::numeric_limits<std::int64_t>::max() || d < std::numeric_limits<std::int64_t>::min()) {
      throw std::invalid_argument("fraction out of range");
    }
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
  }

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::string digits;
  int frac_digits = 0;
  bool seen_point = false;
  std::size_t i = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) throw std::invalid_argument("no digits in number");
  int exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw std::invalid_argument("unexpected character in number");
    const std::string exp_text(text.substr(i + 1));
    if (exp_text.empty()) throw std::invalid_argument("missing exponent");
    std::size_t used = 0;
    exponent = std::stoi(exp_text, &used);
    if (used != exp_text.size()) throw std::invalid_argument("malformed exponent");
  }

  // strip leading zeros so the digit budget is spent on significant digits
  const auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  if (digits.size() > 18) throw std::invalid_argument("too many significant digits");
  std::int64_t mantissa = std::stoll(digits);
  const int scale = frac_digits - exponent;
  Rational out = scale >= 0 ? Rational(mantissa, pow10_checked(scale))
                            : Rational(mantissa * pow10_checked(-scale), 1);
  if (scale < 0 && mantissa != 0 && out.num() / pow10_checked(-scale) != mantissa) {
    throw std::invalid_argument("number out of range");
  }
  return negative ? Rational(-out.num(), out.den()) : out;
}

double Significance::value() const {
  if (const auto* r = std::get_if<Rational>(&value_)) return r->to_double();
  return std::get<double>(value_);
}

std::string Significance::str() const {
  if (const auto* r = std::get_if<Rational>(&value_)) return r->str();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(value_));
  return buf;
}

bool Significance::exceeded_by(const Rational& p) const {
  if (const auto* r = std::get_if<Rational>(&value_)) return p > *r;
  // p > x  <=>  p.num - x * p.den > 0
  return sign_of_int_minus_product(static_cast<double>(p.num()), std::get<double>(value_),
                                   static_cast<double>(p.den())) > 0;
}

std::int64_t Significance::floor_times(std::int64_t m) const {
  if (const auto* r = std::get_if<Rational>(&value_)) {
    const i128 prod = static_cast<i128>(r->num()) * m;
    i128 q = prod / r->den();
    if (prod % r->den() != 0 && prod < 0) --q;
    return static_cast<std::int64_t>(q);
  }
  const double x = std::get<double>(value_);
  const double md = static_cast<double>(m);
  const double p = x * md;
  double f = std::floor(p);
  // If the rounded product landed exactly on an integer, the true product may
  // sit just below it. Otherwise no integer separates p from the true value.
  if (f == p && sign_of_int_minus_product(f, x, md) > 0) f -= 1.0;
  return static_cast<std::int64_t>(f);
}

bool Significance::in_unit_interval() const {
  if (const auto* r = std::get_if<Rational>(&value_)) return *r >= Rational(0) && *r <= Rational(1);
  const double x = std::get<double>(value_);
  return x >= 0.0 && x <= 1.0;
}

bool Significance::is_one() const {
  if (const auto* r = std::get_if<Rational>(&value_)) return *r == Rational(1);
  return std::get<double>(value_) == 1.0;
}

}  // namespace berncert
