#pragma once

#include <cmath>

namespace adiasim {

// Degree-2 Taylor coefficients (value, first and second derivative with
// respect to one scalar seed) propagated through arithmetic. Equivalent to
// nested forward-mode dual numbers, flattened into one triple.
struct Taylor2 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

constexpr Taylor2 taylor_const(double c) { return {c, 0.0, 0.0}; }
constexpr Taylor2 taylor_var(double x) { return {x, 1.0, 0.0}; }

constexpr Taylor2 operator+(const Taylor2& a, const Taylor2& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}

constexpr Taylor2 operator-(const Taylor2& a, const Taylor2& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}

constexpr Taylor2 operator-(const Taylor2& a) { return {-a.v, -a.d1, -a.d2}; }

constexpr Taylor2 operator*(const Taylor2& a, const Taylor2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

// Caller guarantees b.v != 0 (the profile evaluator reports the offending
// subexpression before dividing).
constexpr Taylor2 operator/(const Taylor2& a, const Taylor2& b) {
  const double q = a.v / b.v;
  const double q1 = (a.d1 - q * b.d1) / b.v;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}

// Chain rule for a scalar function applied to g: needs f(g.v), f'(g.v), f''(g.v).
constexpr Taylor2 chain(const Taylor2& g, double f, double fp, double fpp) {
  return {f, fp * g.d1, fpp * g.d1 * g.d1 + fp * g.d2};
}

inline Taylor2 sin(const Taylor2& g) {
  const double s = std::sin(g.v), c = std::cos(g.v);
  return chain(g, s, c, -s);
}

inline Taylor2 cos(const Taylor2& g) {
  const double s = std::sin(g.v), c = std::cos(g.v);
  return chain(g, c, -s, -c);
}

inline Taylor2 tan(const Taylor2& g) {
  const double t = std::tan(g.v), sec2 = 1.0 + t * t;
  return chain(g, t, sec2, 2.0 * t * sec2);
}

inline Taylor2 exp(const Taylor2& g) {
  const double e = std::exp(g.v);
  return chain(g, e, e, e);
}

inline Taylor2 tanh(const Taylor2& g) {
  const double t = std::tanh(g.v), sech2 = 1.0 - t * t;
  return chain(g, t, sech2, -2.0 * t * sech2);
}

// Caller guarantees g.v > 0.
inline Taylor2 sqrt(const Taylor2& g) {
  const double r = std::sqrt(g.v);
  return chain(g, r, 0.5 / r, -0.25 / (r * g.v));
}

inline Taylor2 atan(const Taylor2& g) {
  const double w = 1.0 + g.v * g.v;
  return chain(g, std::atan(g.v), 1.0 / w, -2.0 * g.v / (w * w));
}

// Integer power by squaring; exact chain via repeated products. Negative
// exponents go through the reciprocal, so the caller must rule out base 0.
constexpr Taylor2 powi(Taylor2 base, long long n) {
  if (n < 0) return taylor_const(1.0) / powi(base, -n);
  Taylor2 acc = taylor_const(1.0);
  while (n > 0) {
    if (n & 1) acc = acc * base;
    base = base * base;
    n >>= 1;
  }
  return acc;
}

// General power a^b = exp(b * log a); caller guarantees a.v > 0.
inline Taylor2 pow(const Taylor2& a, const Taylor2& b) {
  const Taylor2 loga = chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
  return exp(b * loga);
}

} // namespace adiasim
