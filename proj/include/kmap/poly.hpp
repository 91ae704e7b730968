#pragma once
// Sparse multivariate polynomials over an exact coefficient field, with a
// fixed ordered variable list per ring.  Canonical term order is graded
// lexicographic with the first declared variable largest.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <memory>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kmap/scalar.hpp"

namespace kmap {

constexpr int kMaxVars = 12;

struct Ring {
  std::vector<std::string> vars;

  explicit Ring(std::vector<std::string> v) : vars(std::move(v)) {
    if (vars.size() > kMaxVars) throw std::invalid_argument("Ring: too many variables");
  }
  int size() const { return (int)vars.size(); }
  int index(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (vars[i] == name) return i;
    return -1;
  }
};

using RingPtr = std::shared_ptr<const Ring>;

inline RingPtr make_ring(std::vector<std::string> vars) {
  return std::make_shared<const Ring>(std::move(vars));
}

struct Monomial {
  std::array<std::uint16_t, kMaxVars> e{};
  std::uint8_t nv = 0;

  unsigned total_degree() const {
    unsigned d = 0;
    for (int i = 0; i < nv; ++i) d += e[i];
    return d;
  }
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.nv == b.nv && a.e == b.e;
  }
};

// Ordering used for canonical term lists: a before b when a is larger in
// graded lex (higher total degree first; ties broken by earlier variables).
inline bool gradlex_greater(const Monomial& a, const Monomial& b) {
  unsigned da = a.total_degree(), db = b.total_degree();
  if (da != db) return da > db;
  for (int i = 0; i < a.nv; ++i)
    if (a.e[i] != b.e[i]) return a.e[i] > b.e[i];
  return false;
}

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < m.nv; ++i) {
      h ^= m.e[i];
      h *= 1099511628211ull;
    }
    return (std::size_t)h;
  }
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.nv = a.nv;
  for (int i = 0; i < a.nv; ++i) r.e[i] = (std::uint16_t)(a.e[i] + b.e[i]);
  return r;
}

// Returns true and writes quotient exponents when b divides a.
inline bool mono_div(const Monomial& a, const Monomial& b, Monomial& out) {
  out.nv = a.nv;
  for (int i = 0; i < a.nv; ++i) {
    if (a.e[i] < b.e[i]) return false;
    out.e[i] = (std::uint16_t)(a.e[i] - b.e[i]);
  }
  return true;
}

template <class K>
class MultiPoly {
 public:
  RingPtr ring;
  // Sorted by gradlex_greater, leading term first; no zero coefficients.
  std::vector<std::pair<Monomial, K>> terms;

  MultiPoly() = default;
  explicit MultiPoly(RingPtr r) : ring(std::move(r)) {}

  static MultiPoly zero(RingPtr r) { return MultiPoly(std::move(r)); }
  static MultiPoly constant(RingPtr r, const K& c) {
    MultiPoly p(std::move(r));
    if (!is_zero(c)) {
      Monomial m;
      m.nv = (std::uint8_t)p.ring->size();
      p.terms.emplace_back(m, c);
    }
    return p;
  }
  static MultiPoly variable(RingPtr r, int idx, const K& onev) {
    MultiPoly p(std::move(r));
    Monomial m;
    m.nv = (std::uint8_t)p.ring->size();
    m.e[idx] = 1;
    p.terms.emplace_back(m, onev);
    return p;
  }

  bool is_zero_poly() const { return terms.empty(); }
  int nvars() const { return ring->size(); }

  int total_degree() const {
    int d = -1;
    for (auto& t : terms) d = std::max(d, (int)t.first.total_degree());
    return d;
  }
  bool is_homogeneous() const {
    if (terms.empty()) return true;
    unsigned d = terms.front().first.total_degree();
    for (auto& t : terms)
      if (t.first.total_degree() != d) return false;
    return true;
  }
  const std::pair<Monomial, K>& leading() const {
    if (terms.empty()) throw std::domain_error("leading term of zero polynomial");
    return terms.front();
  }
  std::size_t term_count() const { return terms.size(); }

  void normalize_order() {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return gradlex_greater(a.first, b.first); });
  }
};

template <class K>
MultiPoly<K> operator-(const MultiPoly<K>& p) {
  MultiPoly<K> r(p.ring);
  r.terms.reserve(p.terms.size());
  for (auto& t : p.terms) r.terms.emplace_back(t.first, -t.second);
  return r;
}

template <class K>
MultiPoly<K> add_scaled(const MultiPoly<K>& p, const MultiPoly<K>& q, bool subtract) {
  MultiPoly<K> r(p.ring);
  r.terms.reserve(p.terms.size() + q.terms.size());
  std::size_t i = 0, j = 0;
  while (i < p.terms.size() || j < q.terms.size()) {
    bool take_p;
    if (i >= p.terms.size()) take_p = false;
    else if (j >= q.terms.size()) take_p = true;
    else if (p.terms[i].first == q.terms[j].first) {
      K c = subtract ? K(p.terms[i].second - q.terms[j].second)
                     : K(p.terms[i].second + q.terms[j].second);
      if (!is_zero(c)) r.terms.emplace_back(p.terms[i].first, c);
      ++i; ++j;
      continue;
    } else take_p = gradlex_greater(p.terms[i].first, q.terms[j].first);
    if (take_p) { r.terms.push_back(p.terms[i]); ++i; }
    else {
      K c = subtract ? K(-q.terms[j].second) : q.terms[j].second;
      r.terms.emplace_back(q.terms[j].first, c);
      ++j;
    }
  }
  return r;
}

template <class K>
MultiPoly<K> operator+(const MultiPoly<K>& p, const MultiPoly<K>& q) { return add_scaled(p, q, false); }
template <class K>
MultiPoly<K> operator-(const MultiPoly<K>& p, const MultiPoly<K>& q) { return add_scaled(p, q, true); }

template <class K>
MultiPoly<K> operator*(const MultiPoly<K>& p, const MultiPoly<K>& q) {
  MultiPoly<K> r(p.ring);
  if (p.terms.empty() || q.terms.empty()) return r;
  std::unordered_map<Monomial, K, MonomialHash> acc;
  acc.reserve(p.terms.size() * 2 + q.terms.size());
  for (auto& a : p.terms)
    for (auto& b : q.terms) {
      Monomial m = mono_mul(a.first, b.first);
      K prod = a.second * b.second;
      auto it = acc.find(m);
      if (it == acc.end()) acc.emplace(m, prod);
      else it->second = it->second + prod;
    }
  r.terms.reserve(acc.size());
  for (auto& kv : acc)
    if (!is_zero(kv.second)) r.terms.emplace_back(kv.first, kv.second);
  r.normalize_order();
  return r;
}

template <class K>
MultiPoly<K> scalar_mul(const MultiPoly<K>& p, const K& c) {
  MultiPoly<K> r(p.ring);
  if (is_zero(c)) return r;
  r.terms.reserve(p.terms.size());
  for (auto& t : p.terms) r.terms.emplace_back(t.first, K(t.second * c));
  return r;
}

template <class K>
MultiPoly<K> poly_pow(const MultiPoly<K>& p, unsigned e) {
  MultiPoly<K> r = p;
  if (e == 0) {
    if (p.terms.empty()) throw std::domain_error("0^0 of polynomials");
    K one = p.terms.front().second / p.terms.front().second;
    return MultiPoly<K>::constant(p.ring, one);
  }
  for (unsigned i = 1; i < e; ++i) r = r * p;
  return r;
}

template <class K>
K poly_eval(const MultiPoly<K>& p, const std::vector<K>& point, const K& one) {
  if ((int)point.size() != p.nvars())
    throw std::invalid_argument("poly_eval: arity mismatch");
  // cache point powers per variable
  std::vector<std::vector<K>> pow(p.nvars());
  for (int i = 0; i < p.nvars(); ++i) pow[i].push_back(one);
  K acc = one - one;  // zero
  for (auto& t : p.terms) {
    K v = one;
    for (int i = 0; i < p.nvars(); ++i) {
      unsigned e = t.first.e[i];
      while (pow[i].size() <= e) pow[i].push_back(pow[i].back() * point[i]);
      if (e) v = v * pow[i][e];
    }
    acc = acc + v * t.second;
  }
  return acc;
}

// Substitute each ring variable by a polynomial in a target ring.
template <class K>
MultiPoly<K> substitute(const MultiPoly<K>& p, const std::vector<MultiPoly<K>>& images) {
  if ((int)images.size() != p.nvars())
    throw std::invalid_argument("substitute: arity mismatch");
  RingPtr tgt = images.empty() ? p.ring : images[0].ring;
  MultiPoly<K> acc = MultiPoly<K>::zero(tgt);
  if (p.terms.empty()) return acc;
  K one = p.terms.front().second / p.terms.front().second;
  std::vector<std::vector<MultiPoly<K>>> pow(p.nvars());
  for (int i = 0; i < p.nvars(); ++i) pow[i].push_back(MultiPoly<K>::constant(tgt, one));
  for (auto& t : p.terms) {
    MultiPoly<K> v = MultiPoly<K>::constant(tgt, t.second);
    for (int i = 0; i < p.nvars(); ++i) {
      unsigned e = t.first.e[i];
      while (pow[i].size() <= e) pow[i].push_back(pow[i].back() * images[i]);
      if (e) v = v * pow[i][e];
    }
    acc = acc + v;
  }
  return acc;
}

template <class K>
MultiPoly<K> derivative(const MultiPoly<K>& p, int var) {
  MultiPoly<K> r(p.ring);
  if (p.terms.empty()) return r;
  K one = p.terms.front().second / p.terms.front().second;
  for (auto& t : p.terms) {
    unsigned e = t.first.e[var];
    if (e == 0) continue;
    K c = t.second;
    K mult = one - one;
    for (unsigned i = 0; i < e; ++i) mult = mult + one;  // field copy of e
    Monomial m = t.first;
    m.e[var] = (std::uint16_t)(e - 1);
    r.terms.emplace_back(m, K(c * mult));
  }
  r.normalize_order();
  return r;
}

template <class K>
int lowest_order(const MultiPoly<K>& p, int var) {
  if (p.terms.empty()) throw std::domain_error("lowest_order: zero polynomial");
  int m = INT32_MAX;
  for (auto& t : p.terms) m = std::min(m, (int)t.first.e[var]);
  return m;
}

// Coefficient of var^k, as a polynomial in the same ring (var removed).
template <class K>
MultiPoly<K> coeff_of(const MultiPoly<K>& p, int var, int k) {
  MultiPoly<K> r(p.ring);
  for (auto& t : p.terms)
    if ((int)t.first.e[var] == k) {
      Monomial m = t.first;
      m.e[var] = 0;
      r.terms.emplace_back(m, t.second);
    }
  r.normalize_order();
  return r;
}

template <class K>
int degree_in(const MultiPoly<K>& p, int var) {
  int d = -1;
  for (auto& t : p.terms) d = std::max(d, (int)t.first.e[var]);
  return d;
}

// Exact division; returns false when q does not divide p.  The remainder
// lives in a hash map with a lazy max-heap over its monomials, so each
// elimination step costs O(|q| log T) instead of a full remainder rebuild.
template <class K>
bool divide_exact(const MultiPoly<K>& p, const MultiPoly<K>& q, MultiPoly<K>& quot) {
  if (q.terms.empty()) throw std::domain_error("divide_exact: division by zero");
  std::unordered_map<Monomial, K, MonomialHash> rem;
  rem.reserve(p.terms.size() * 2);
  auto cmp = [](const Monomial& a, const Monomial& b) { return gradlex_greater(b, a); };
  std::priority_queue<Monomial, std::vector<Monomial>, decltype(cmp)> heap(cmp);
  for (auto& t : p.terms) {
    rem.emplace(t.first, t.second);
    heap.push(t.first);
  }
  std::vector<std::pair<Monomial, K>> qterms;
  const Monomial& lm = q.leading().first;
  const K& lc = q.leading().second;
  while (!heap.empty()) {
    Monomial top = heap.top();
    heap.pop();
    auto it = rem.find(top);
    if (it == rem.end() || is_zero(it->second)) {
      if (it != rem.end()) rem.erase(it);
      continue;
    }
    Monomial qm;
    if (!mono_div(top, lm, qm)) return false;
    K qc = it->second / lc;
    rem.erase(it);
    qterms.emplace_back(qm, qc);
    bool lead_skipped = false;
    for (auto& t : q.terms) {
      if (!lead_skipped && t.first == lm) {
        lead_skipped = true;  // the leading term cancels `top` exactly
        continue;
      }
      Monomial m = mono_mul(t.first, qm);
      K delta = t.second * qc;
      auto [pos, inserted] = rem.try_emplace(m, K(-delta));
      if (inserted) {
        heap.push(m);
      } else {
        pos->second = pos->second - delta;
        if (is_zero(pos->second)) rem.erase(pos);
      }
    }
  }
  for (auto& kv : rem)
    if (!is_zero(kv.second)) return false;
  quot = MultiPoly<K>(p.ring);
  quot.terms = std::move(qterms);
  quot.normalize_order();
  return true;
}

// ---------------------------------------------------------------------------
// Parsing and canonical printing
// ---------------------------------------------------------------------------
namespace detail {

template <class K>
class Parser {
 public:
  Parser(const std::string& s, RingPtr ring, const K& one)
      : s_(s), ring_(std::move(ring)), one_(one) {}

  MultiPoly<K> parse() {
    MultiPoly<K> r = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return r;
  }

 private:
  const std::string& s_;
  RingPtr ring_;
  K one_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("parse error at position " + std::to_string(pos_) + ": " + msg);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
    return false;
  }
  MultiPoly<K> expr() {
    bool neg = false;
    skip_ws();
    if (eat('-')) neg = true;
    else eat('+');
    MultiPoly<K> acc = term();
    if (neg) acc = -acc;
    for (;;) {
      skip_ws();
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else break;
    }
    return acc;
  }
  MultiPoly<K> term() {
    MultiPoly<K> acc = factor();
    while (eat('*')) acc = acc * factor();
    return acc;
  }
  MultiPoly<K> factor() {
    skip_ws();
    if (eat('(')) {
      MultiPoly<K> inner = expr();
      if (!eat(')')) fail("expected ')'");
      return maybe_pow_poly(inner);
    }
    if (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
      Rat num = number();
      return MultiPoly<K>::constant(ring_, scalar_from_rational(num, one_));
    }
    if (pos_ < s_.size() && (std::isalpha((unsigned char)s_[pos_]) || s_[pos_] == '_')) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      int idx = ring_->index(name);
      if (idx < 0) { pos_ = start; fail("unknown variable '" + name + "'"); }
      MultiPoly<K> v = MultiPoly<K>::variable(ring_, idx, one_);
      return maybe_pow_poly(v);
    }
    fail("expected factor");
  }
  MultiPoly<K> maybe_pow_poly(const MultiPoly<K>& base) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
      if (start == pos_) fail("expected exponent");
      unsigned e = (unsigned)std::stoul(s_.substr(start, pos_ - start));
      return poly_pow(base, e);
    }
    return base;
  }
  Rat number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
    if (start == pos_) fail("expected number");
    BigInt num(s_.substr(start, pos_ - start));
    if (pos_ < s_.size() && s_[pos_] == '/') {
      ++pos_;
      std::size_t ds = pos_;
      while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
      if (ds == pos_) fail("expected denominator");
      BigInt den(s_.substr(ds, pos_ - ds));
      if (den == 0) fail("zero denominator");
      return Rat(num, den);
    }
    return Rat(num);
  }
};

inline bool rat_is_negative(const Rat& r) { return r < 0; }
inline bool rat_is_negative(const Fp&) { return false; }
inline std::string coeff_str(const Rat& r) { return to_string(r); }
inline std::string coeff_str(const Fp& x) { return to_string(x); }
inline Rat coeff_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }
inline Fp coeff_abs(const Fp& x) { return x; }
template <class K>
bool coeff_is_one(const K& c) {
  return !is_zero(c) && is_zero(K(c / c - c));
}

}  // namespace detail

template <class K>
MultiPoly<K> poly_parse(const std::string& text, RingPtr ring, const K& one) {
  detail::Parser<K> p(text, std::move(ring), one);
  return p.parse();
}

inline MultiPoly<Rat> poly_parse(const std::string& text, RingPtr ring) {
  return poly_parse<Rat>(text, std::move(ring), Rat(1));
}

template <class K>
std::string poly_print(const MultiPoly<K>& p) {
  if (p.terms.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto& t : p.terms) {
    K c = t.second;
    bool neg = detail::rat_is_negative(c);
    if (first) {
      if (neg) out += "-";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    K a = detail::coeff_abs(c);
    std::string vars;
    for (int i = 0; i < p.nvars(); ++i) {
      unsigned e = t.first.e[i];
      if (!e) continue;
      if (!vars.empty()) vars += "*";
      vars += p.ring->vars[i];
      if (e > 1) vars += "^" + std::to_string(e);
    }
    if (vars.empty()) out += detail::coeff_str(a);
    else if (detail::coeff_is_one(a)) out += vars;
    else out += detail::coeff_str(a) + "*" + vars;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization: primitive integer representative with positive leading
// graded-lex coefficient over the rationals; monic over a prime field.
// ---------------------------------------------------------------------------
inline MultiPoly<Rat> normalize_scalar(const MultiPoly<Rat>& p) {
  if (p.terms.empty()) return p;
  BigInt num_gcd = 0, den_lcm = 1;
  for (auto& t : p.terms) {
    BigInt n = boost::multiprecision::numerator(t.second);
    BigInt d = boost::multiprecision::denominator(t.second);
    num_gcd = boost::multiprecision::gcd(num_gcd, n < 0 ? BigInt(-n) : n);
    den_lcm = boost::multiprecision::lcm(den_lcm, d);
  }
  Rat scale(den_lcm, num_gcd);
  if (p.leading().second < 0) scale = -scale;
  return scalar_mul(p, scale);
}

inline MultiPoly<Fp> normalize_scalar(const MultiPoly<Fp>& p) {
  if (p.terms.empty()) return p;
  return scalar_mul(p, p.leading().second.inverse());
}

template <class K>
bool poly_equal(const MultiPoly<K>& p, const MultiPoly<K>& q) {
  return (p - q).terms.empty();
}

// Map a rational-coefficient polynomial into another coefficient field
// (used to reduce exact integer data mod p).
template <class K>
MultiPoly<K> map_coeffs(const MultiPoly<Rat>& p, RingPtr ring, const K& one) {
  MultiPoly<K> r(ring);
  for (auto& t : p.terms) {
    K c = scalar_from_rational(t.second, one);
    if (!is_zero(c)) r.terms.emplace_back(t.first, c);
  }
  r.normalize_order();
  return r;
}

}  // namespace kmap
