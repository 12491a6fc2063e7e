#include "phprior/scalar.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "phprior/errors.hpp"

namespace phprior {

namespace {

using i128 = __int128;

std::optional<Rational> reduce(i128 num, i128 den) {
  if (den == 0) throw DomainError("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr i128 kMax = INT64_MAX;
  if (num > kMax || num < -kMax || den > kMax) return std::nullopt;
  return Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) {
  auto r = reduce(num, den);
  if (!r) throw DomainError("rational: overflow");
  return *r;
}

std::optional<Rational> add(const Rational& x, const Rational& y) {
  return reduce(static_cast<i128>(x.num) * y.den + static_cast<i128>(y.num) * x.den,
                static_cast<i128>(x.den) * y.den);
}

std::optional<Rational> sub(const Rational& x, const Rational& y) {
  return reduce(static_cast<i128>(x.num) * y.den - static_cast<i128>(y.num) * x.den,
                static_cast<i128>(x.den) * y.den);
}

std::optional<Rational> mul(const Rational& x, const Rational& y) {
  return reduce(static_cast<i128>(x.num) * y.num, static_cast<i128>(x.den) * y.den);
}

std::optional<Rational> div(const Rational& x, const Rational& y) {
  if (y.num == 0) throw DomainError("rational: division by zero");
  return reduce(static_cast<i128>(x.num) * y.den, static_cast<i128>(x.den) * y.num);
}

int compare(const Rational& x, const Rational& y) {
  const i128 l = static_cast<i128>(x.num) * y.den;
  const i128 r = static_cast<i128>(y.num) * x.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

Scalar Scalar::parse(const std::string& text) {
  if (text.empty()) throw ParseError("empty number");
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t used_n = 0, used_d = 0;
      const std::string ns = text.substr(0, slash), ds = text.substr(slash + 1);
      const long long n = std::stoll(ns, &used_n);
      const long long d = std::stoll(ds, &used_d);
      if (used_n != ns.size() || used_d != ds.size() || d == 0) throw ParseError("invalid rational: " + text);
      return from_rational(Rational::make(n, d));
    }
    // Terminating decimal: digits with at most one '.', optional sign.
    std::size_t i = 0;
    bool negative = false;
    if (text[0] == '-' || text[0] == '+') {
      negative = text[0] == '-';
      i = 1;
    }
    std::int64_t num = 0, den = 1;
    bool seen_dot = false, exact_ok = i < text.size();
    int digits = 0;
    for (; i < text.size(); ++i) {
      const char ch = text[i];
      if (ch == '.' && !seen_dot) {
        seen_dot = true;
        continue;
      }
      if (ch < '0' || ch > '9' || ++digits > 17) {
        exact_ok = false;
        break;
      }
      num = num * 10 + (ch - '0');
      if (seen_dot) den *= 10;
    }
    if (exact_ok) return from_rational(Rational::make(negative ? -num : num, den));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) throw ParseError("invalid number: " + text);
    return Scalar(v);
  } catch (const std::logic_error&) {
    throw ParseError("invalid number: " + text);
  }
}

std::string Scalar::to_string() const {
  std::ostringstream os;
  if (exact) {
    os << exact->num;
    if (exact->den != 1) os << "/" << exact->den;
  } else {
    os.precision(17);
    os << value;
  }
  return os.str();
}

namespace {
template <class Op, class Exact>
Scalar combine(const Scalar& x, const Scalar& y, Op op, Exact exact_op) {
  Scalar out(op(x.value, y.value));
  if (x.exact && y.exact) {
    if (auto r = exact_op(*x.exact, *y.exact)) {
      out = Scalar::from_rational(*r);
    }
  }
  return out;
}
}  // namespace

Scalar operator+(const Scalar& x, const Scalar& y) {
  return combine(x, y, std::plus<>{}, [](auto a, auto b) { return add(a, b); });
}
Scalar operator-(const Scalar& x, const Scalar& y) {
  return combine(x, y, std::minus<>{}, [](auto a, auto b) { return sub(a, b); });
}
Scalar operator*(const Scalar& x, const Scalar& y) {
  return combine(x, y, std::multiplies<>{}, [](auto a, auto b) { return mul(a, b); });
}
Scalar operator/(const Scalar& x, const Scalar& y) {
  if (y.value == 0.0) throw DomainError("scalar: division by zero");
  return combine(x, y, std::divides<>{}, [](auto a, auto b) { return div(a, b); });
}
Scalar Scalar::operator-() const {
  if (exact) return from_rational(Rational{-exact->num, exact->den});
  return Scalar(-value);
}

bool same_value(const Scalar& x, const Scalar& y, double rel_tol) {
  if (x.exact && y.exact) return compare(*x.exact, *y.exact) == 0;
  const double scale = std::max({1.0, std::fabs(x.value), std::fabs(y.value)});
  return std::fabs(x.value - y.value) <= rel_tol * scale;
}

}  // namespace phprior
