#include "sphereflow/scalar.hpp"

#include <limits>
#include <ostream>
#include <sstream>

namespace sphereflow {

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty number");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + text);
    return num / den;
  }
  std::size_t epos = s.find_first_of("eE");
  long exp10 = 0;
  std::string mant = s;
  if (epos != std::string::npos) {
    exp10 = std::stol(s.substr(epos + 1));
    mant = s.substr(0, epos);
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant = mant.substr(1);
  }
  std::string digits;
  long frac = 0;
  bool seen_dot = false;
  for (char c : mant) {
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("bad number: " + text);
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_dot) ++frac;
    } else {
      throw std::invalid_argument("bad number: " + text);
    }
  }
  if (digits.empty()) throw std::invalid_argument("bad number: " + text);
  // a leading zero would make the integer parser read octal
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  Rational r{Integer(digits)};
  long shift = exp10 - frac;
  Rational ten_pow = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::labs(shift)));
  r = shift >= 0 ? r * ten_pow : r / ten_pow;
  return neg ? -r : r;
}

void squarefree_split(const Integer& m, Integer& s, Integer& d) {
  if (m <= 0) throw NotRepresentable("squarefree_split of nonpositive integer");
  s = 1;
  d = 1;
  Integer r = m;
  const unsigned long bound = 100000;
  for (unsigned long p = 2; p <= bound; p += (p == 2 ? 1 : 2)) {
    Integer pp = Integer(p) * p;
    if (pp > r) break;
    while (r % pp == 0) {
      r /= pp;
      s *= p;
    }
    if (r % p == 0) {
      r /= p;
      d *= p;
    }
  }
  if (r > 1) {
    Integer root = boost::multiprecision::sqrt(r);
    if (root * root == r) {
      s *= root;
    } else if (r < Integer(bound) * bound * bound) {
      // r has at most two prime factors above the bound and is not a square
      d *= r;
    } else {
      throw NotRepresentable("radicand too large to certify squarefree");
    }
  }
}

QuadSurd::QuadSurd(const Rational& a, const Rational& b, long long d) : a_(a), b_(b), d_(d) {
  if (d < 0) throw NotRepresentable("negative radicand");
  normalize();
}

void QuadSurd::normalize() {
  if (b_ == 0 || d_ == 0) {
    b_ = 0;
    d_ = 0;
    return;
  }
  Integer s, core;
  squarefree_split(Integer(d_), s, core);
  if (core == 1) {
    a_ += b_ * Rational(s);
    b_ = 0;
    d_ = 0;
    return;
  }
  if (core > Integer(std::numeric_limits<long long>::max()))
    throw NotRepresentable("radicand overflow");
  b_ *= Rational(s);
  d_ = core.convert_to<long long>();
}

QuadSurd QuadSurd::sqrt_of(const Rational& r) {
  if (r < 0) throw NotRepresentable("square root of negative rational");
  if (r == 0) return QuadSurd();
  Integer num = boost::multiprecision::numerator(r);
  Integer den = boost::multiprecision::denominator(r);
  Integer s, core;
  squarefree_split(num * den, s, core);
  Rational coef = Rational(s) / Rational(den);
  if (core == 1) return QuadSurd(coef);
  if (core > Integer(std::numeric_limits<long long>::max()))
    throw NotRepresentable("radicand overflow");
  QuadSurd out;
  out.b_ = coef;
  out.d_ = core.convert_to<long long>();
  return out;
}

int QuadSurd::sign() const {
  int sa = a_.sign();
  if (d_ == 0) return sa;
  int sb = b_.sign();
  if (sa == sb) return sa;
  if (sa == 0) return sb;
  if (sb == 0) return sa;
  Rational lhs = a_ * a_;
  Rational rhs = b_ * b_ * Rational(d_);
  return lhs > rhs ? sa : sb;
}

double QuadSurd::to_double() const {
  double a = a_.convert_to<double>();
  if (d_ == 0) return a;
  return a + b_.convert_to<double>() * std::sqrt(static_cast<double>(d_));
}

std::string QuadSurd::str() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const QuadSurd& x) {
  if (x.is_rational()) return os << x.rational_part();
  if (x.rational_part() != 0) os << x.rational_part() << (x.surd_part() > 0 ? "+" : "");
  return os << x.surd_part() << "*sqrt(" << x.radicand() << ")";
}

QuadSurd QuadSurd::conj() const {
  QuadSurd out = *this;
  out.b_ = -out.b_;
  return out;
}

QuadSurd QuadSurd::inverse() const {
  if (is_zero()) throw std::domain_error("division by zero");
  if (d_ == 0) return QuadSurd(Rational(1) / a_);
  Rational n = norm();
  QuadSurd out;
  out.a_ = a_ / n;
  out.b_ = -b_ / n;
  out.d_ = d_;
  return out;
}

QuadSurd QuadSurd::sqrt() const {
  if (sign() < 0) throw NotRepresentable("square root of negative value");
  if (d_ == 0) return sqrt_of(a_);
  // (c + e sqrt d)^2 = a + b sqrt d  <=>  c^2 + e^2 d = a, 2ce = b
  Rational n = norm();
  if (n < 0) throw NotRepresentable("no square root in the field");
  QuadSurd rn = sqrt_of(n);
  if (!rn.is_rational()) throw NotRepresentable("no square root in the field");
  for (int pass = 0; pass < 2; ++pass) {
    Rational c2 = (a_ + (pass == 0 ? rn.a_ : -rn.a_)) / 2;
    if (c2 <= 0) continue;
    QuadSurd c = sqrt_of(c2);
    if (!c.is_rational()) continue;
    Rational e = b_ / (2 * c.a_);
    QuadSurd out(c.a_, e, d_);
    if (out.sign() < 0) out = -out;
    return out;
  }
  throw NotRepresentable("no square root in the field");
}

long long QuadSurd::common_radicand(const QuadSurd& o) const {
  if (d_ == 0) return o.d_;
  if (o.d_ == 0 || o.d_ == d_) return d_;
  throw MixedRadicand("mixed radicands " + std::to_string(d_) + " and " + std::to_string(o.d_));
}

QuadSurd& QuadSurd::operator+=(const QuadSurd& o) {
  long long d = common_radicand(o);
  a_ += o.a_;
  b_ += o.b_;
  d_ = d;
  if (b_ == 0) d_ = 0;
  return *this;
}

QuadSurd& QuadSurd::operator-=(const QuadSurd& o) {
  long long d = common_radicand(o);
  a_ -= o.a_;
  b_ -= o.b_;
  d_ = d;
  if (b_ == 0) d_ = 0;
  return *this;
}

QuadSurd& QuadSurd::operator*=(const QuadSurd& o) {
  long long d = common_radicand(o);
  Rational a = a_ * o.a_ + b_ * o.b_ * Rational(d);
  Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = a;
  b_ = b;
  d_ = (b_ == 0) ? 0 : d;
  return *this;
}

QuadSurd QuadSurd::operator-() const {
  QuadSurd out = *this;
  out.a_ = -out.a_;
  out.b_ = -out.b_;
  return out;
}

}  // namespace sphereflow
