#pragma once

#include <cmath>
#include <vector>

#include "pirogov/common.hpp"

namespace pirogov::series {

template <typename T>
struct backend_traits;

template <>
struct backend_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static bool is_one(const Rational& x) { return x == 1; }
  static bool is_zero(const Rational& x) { return x == 0; }
};

template <>
struct backend_traits<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static constexpr double tolerance = 1e-12;
  static bool is_one(double x) { return std::abs(x - 1.0) <= 1e-9; }
  static bool is_zero(double x) { return x == 0.0; }
};

// Taylor polynomial truncated after z^order. Coefficient arithmetic never
// promotes between backends or orders; mixing is an input error.
template <typename T>
struct TruncatedSeries {
  int order = 0;
  std::vector<T> c;  // c[k] multiplies z^k, k = 0..order

  TruncatedSeries() : c(1, T(0)) {}
  explicit TruncatedSeries(int m) : order(m), c(static_cast<size_t>(m) + 1, T(0)) {
    require(m >= 0, "series order must be nonnegative");
  }

  static TruncatedSeries one(int m) {
    TruncatedSeries s(m);
    s.c[0] = T(1);
    return s;
  }
  static TruncatedSeries monomial(int k, const T& coeff, int m) {
    TruncatedSeries s(m);
    require(k >= 0, "monomial power must be nonnegative");
    if (k <= m) s.c[static_cast<size_t>(k)] = coeff;
    return s;
  }

  bool is_zero() const {
    for (const auto& x : c)
      if (!backend_traits<T>::is_zero(x)) return false;
    return true;
  }
  // Index of the first nonzero coefficient, or order + 1 when all vanish.
  int min_order() const {
    for (int k = 0; k <= order; ++k)
      if (!backend_traits<T>::is_zero(c[static_cast<size_t>(k)])) return k;
    return order + 1;
  }
};

template <typename T>
TruncatedSeries<T> resized(const TruncatedSeries<T>& a, int m) {
  TruncatedSeries<T> out(m);
  for (int k = 0; k <= std::min(m, a.order); ++k) out.c[static_cast<size_t>(k)] = a.c[static_cast<size_t>(k)];
  return out;
}

template <typename T>
TruncatedSeries<T> add(const TruncatedSeries<T>& a, const TruncatedSeries<T>& b) {
  require(a.order == b.order, "series order mismatch");
  TruncatedSeries<T> out(a.order);
  for (int k = 0; k <= a.order; ++k)
    out.c[static_cast<size_t>(k)] = a.c[static_cast<size_t>(k)] + b.c[static_cast<size_t>(k)];
  return out;
}

template <typename T>
void add_scaled_inplace(TruncatedSeries<T>& a, const T& s, const TruncatedSeries<T>& b) {
  require(a.order == b.order, "series order mismatch");
  for (int k = 0; k <= a.order; ++k)
    a.c[static_cast<size_t>(k)] += s * b.c[static_cast<size_t>(k)];
}

// Truncated Cauchy product; skips zero coefficients so sparse factors
// (weight monomials) stay cheap.
template <typename T>
TruncatedSeries<T> mul(const TruncatedSeries<T>& a, const TruncatedSeries<T>& b) {
  require(a.order == b.order, "series order mismatch");
  TruncatedSeries<T> out(a.order);
  for (int i = 0; i <= a.order; ++i) {
    if (backend_traits<T>::is_zero(a.c[static_cast<size_t>(i)])) continue;
    for (int j = 0; i + j <= a.order; ++j) {
      if (backend_traits<T>::is_zero(b.c[static_cast<size_t>(j)])) continue;
      out.c[static_cast<size_t>(i + j)] += a.c[static_cast<size_t>(i)] * b.c[static_cast<size_t>(j)];
    }
  }
  return out;
}

template <typename T>
TruncatedSeries<T> pow(const TruncatedSeries<T>& a, int k) {
  require(k >= 0, "negative series power");
  TruncatedSeries<T> out = TruncatedSeries<T>::one(a.order);
  for (int i = 0; i < k; ++i) out = mul(out, a);
  return out;
}

// log(E) for a polynomial E with constant term 1: the recurrence
// k*e_k = sum_{j=1..k} j*p_j*e_{k-j} solved for p (derived from E' = E *
// (log E)'; matches log(1+z) = z - z^2/2 + ...).
template <typename T>
TruncatedSeries<T> log_from_poly(const TruncatedSeries<T>& e) {
  require(backend_traits<T>::is_one(e.c[0]), "log requires constant term 1");
  int m = e.order;
  TruncatedSeries<T> p(m);
  for (int k = 1; k <= m; ++k) {
    T acc = T(k) * e.c[static_cast<size_t>(k)];
    for (int j = 1; j < k; ++j)
      acc -= T(j) * p.c[static_cast<size_t>(j)] * e.c[static_cast<size_t>(k - j)];
    p.c[static_cast<size_t>(k)] = acc / T(k);
  }
  return p;
}

// exp(P) for a series P with zero constant term: the same recurrence solved
// for e, e_k = (1/k) sum_{j=1..k} j*p_j*e_{k-j}, e_0 = 1.
template <typename T>
TruncatedSeries<T> poly_from_log(const TruncatedSeries<T>& p) {
  require(backend_traits<T>::is_zero(p.c[0]), "exp requires zero constant term");
  int m = p.order;
  TruncatedSeries<T> e(m);
  e.c[0] = T(1);
  for (int k = 1; k <= m; ++k) {
    T acc = T(0);
    for (int j = 1; j <= k; ++j)
      acc += T(j) * p.c[static_cast<size_t>(j)] * e.c[static_cast<size_t>(k - j)];
    e.c[static_cast<size_t>(k)] = acc / T(k);
  }
  return e;
}

template <typename T>
T evaluate(const TruncatedSeries<T>& s, const T& z) {
  T acc = T(0);
  for (int k = s.order; k >= 0; --k) acc = acc * z + s.c[static_cast<size_t>(k)];
  return acc;
}

inline double to_double(const Rational& x) { return static_cast<double>(x); }
inline double to_double(double x) { return x; }

template <typename T>
TruncatedSeries<double> to_double_series(const TruncatedSeries<T>& s) {
  TruncatedSeries<double> out(s.order);
  for (int k = 0; k <= s.order; ++k)
    out.c[static_cast<size_t>(k)] = to_double(s.c[static_cast<size_t>(k)]);
  return out;
}

}  // namespace pirogov::series
