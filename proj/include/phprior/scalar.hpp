#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace phprior {

// Reduced fraction num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// Checked rational arithmetic; nullopt on int64 overflow.
std::optional<Rational> add(const Rational& x, const Rational& y);
std::optional<Rational> sub(const Rational& x, const Rational& y);
std::optional<Rational> mul(const Rational& x, const Rational& y);
std::optional<Rational> div(const Rational& x, const Rational& y);
int compare(const Rational& x, const Rational& y);

// A real parameter that remembers its exact rational value when known, so
// pole coincidences can be decided exactly.
struct Scalar {
  double value = 0.0;
  std::optional<Rational> exact;

  Scalar() = default;
  Scalar(double v) : value(v) {}  // NOLINT: implicit by intent
  static Scalar integer(std::int64_t v) { return from_rational(Rational{v, 1}); }
  static Scalar from_rational(Rational r) { return {r.to_double(), r}; }
  // "3/2", "-1", "0.25" parse exactly; anything else via strtod, inexact.
  static Scalar parse(const std::string& text);

  bool is_exact() const { return exact.has_value(); }
  std::string to_string() const;

  friend Scalar operator+(const Scalar& x, const Scalar& y);
  friend Scalar operator-(const Scalar& x, const Scalar& y);
  friend Scalar operator*(const Scalar& x, const Scalar& y);
  friend Scalar operator/(const Scalar& x, const Scalar& y);
  Scalar operator-() const;

 private:
  Scalar(double v, std::optional<Rational> e) : value(v), exact(e) {}
};

// Equality: exact comparison when both are exact, otherwise relative tolerance.
bool same_value(const Scalar& x, const Scalar& y, double rel_tol = 1e-12);

}  // namespace phprior
