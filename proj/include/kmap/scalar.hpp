#pragma once
// Coefficient fields: exact rationals (arbitrary precision) and a 62-bit
// prime field.  Both are drop-in template parameters for MultiPoly.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kmap {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rat& r) { return r.str(); }
inline bool is_zero(const Rat& r) { return r == 0; }
inline Rat scalar_from_rational(const Rat& r, const Rat&) { return r; }

// ---------------------------------------------------------------------------
// Prime field with a runtime modulus.  The modulus travels with each element
// so values from different fields cannot be mixed silently.
// ---------------------------------------------------------------------------
struct Fp {
  std::uint64_t v = 0;
  std::uint64_t p = 0;  // 0 means "unset" (the zero of any field)

  Fp() = default;
  Fp(std::uint64_t value, std::uint64_t prime) : v(value % prime), p(prime) {}

  static std::uint64_t merge_mod(const Fp& a, const Fp& b) {
    if (a.p == 0) return b.p;
    if (b.p == 0) return a.p;
    if (a.p != b.p) throw std::invalid_argument("Fp: mixed moduli");
    return a.p;
  }

  friend Fp operator+(const Fp& a, const Fp& b) {
    std::uint64_t m = merge_mod(a, b);
    if (m == 0) return Fp();
    std::uint64_t s = a.v + b.v;
    if (s >= m) s -= m;
    return Fp(s, m);
  }
  friend Fp operator-(const Fp& a, const Fp& b) {
    std::uint64_t m = merge_mod(a, b);
    if (m == 0) return Fp();
    std::uint64_t s = a.v >= b.v ? a.v - b.v : a.v + m - b.v;
    return Fp(s, m);
  }
  friend Fp operator*(const Fp& a, const Fp& b) {
    std::uint64_t m = merge_mod(a, b);
    if (m == 0) return Fp();
    unsigned __int128 t = (unsigned __int128)a.v * b.v;
    return Fp((std::uint64_t)(t % m), m);
  }
  Fp operator-() const {
    if (p == 0 || v == 0) return Fp(0, p);
    return Fp(p - v, p);
  }
  Fp inverse() const {
    if (v == 0) throw std::domain_error("Fp: inverse of zero");
    // extended Euclid on (v, p)
    std::int64_t t = 0, newt = 1;
    std::uint64_t r = p, newr = v;
    while (newr != 0) {
      std::uint64_t q = r / newr;
      std::int64_t tt = t - (std::int64_t)q * newt;
      t = newt; newt = tt;
      std::uint64_t rr = r - q * newr;
      r = newr; newr = rr;
    }
    if (r != 1) throw std::domain_error("Fp: modulus not prime?");
    std::uint64_t u = t >= 0 ? (std::uint64_t)t : p - (std::uint64_t)(-t);
    return Fp(u, p);
  }
  friend Fp operator/(const Fp& a, const Fp& b) { return a * b.inverse(); }
  friend bool operator==(const Fp& a, const Fp& b) {
    if (a.v == 0 && b.v == 0) return true;
    return merge_mod(a, b) != 0 && a.v == b.v;
  }
  friend bool operator!=(const Fp& a, const Fp& b) { return !(a == b); }
};

inline std::string to_string(const Fp& x) { return std::to_string(x.v); }
inline bool is_zero(const Fp& x) { return x.v == 0; }

// Reduce an exact rational into F_p (the "witness" supplies the modulus).
inline Fp scalar_from_rational(const Rat& r, const Fp& witness) {
  std::uint64_t p = witness.p;
  if (p == 0) throw std::invalid_argument("Fp: modulus unset");
  BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  bool neg = num < 0;
  if (neg) num = -num;
  Fp n((std::uint64_t)(num % p), p);
  Fp d((std::uint64_t)(den % p), p);
  if (is_zero(d)) throw std::domain_error("Fp: denominator divisible by modulus");
  Fp q = n / d;
  return neg ? -q : q;
}

// Miller-Rabin primality for 64-bit inputs (deterministic witness set).
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull})
    if (n % q == 0) return n == q;
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  auto mulmod = [n](std::uint64_t a, std::uint64_t b) {
    return (std::uint64_t)(((unsigned __int128)a * b) % n);
  };
  auto powmod = [&](std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    a %= n;
    while (e) {
      if (e & 1) r = mulmod(r, a);
      a = mulmod(a, a);
      e >>= 1;
    }
    return r;
  };
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x);
      if (x == n - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

// First prime at or above the given 62-bit-range seed value.
inline std::uint64_t next_prime_u64(std::uint64_t start) {
  if (start < 3) return 2;
  if ((start & 1) == 0) ++start;
  while (!is_prime_u64(start)) start += 2;
  return start;
}

}  // namespace kmap
