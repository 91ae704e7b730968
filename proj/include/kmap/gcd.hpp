#pragma once
// Multivariate gcd (primitive pseudo-remainder sequence, recursive over the
// variable list) plus trial division against a known factor catalogue.

#include <stdexcept>
#include <vector>

#include "kmap/poly.hpp"

namespace kmap {

namespace detail {

template <class K>
int first_active_var(const MultiPoly<K>& p, const MultiPoly<K>& q) {
  for (int i = 0; i < p.nvars(); ++i)
    if (degree_in(p, i) > 0 || degree_in(q, i) > 0) return i;
  return -1;
}

}  // namespace detail

template <class K>
MultiPoly<K> poly_gcd(const MultiPoly<K>& p, const MultiPoly<K>& q);

// gcd of the coefficients of p viewed as univariate in var.
template <class K>
MultiPoly<K> poly_content(const MultiPoly<K>& p, int var) {
  MultiPoly<K> c = MultiPoly<K>::zero(p.ring);
  int d = degree_in(p, var);
  for (int k = 0; k <= d; ++k) {
    MultiPoly<K> ck = coeff_of(p, var, k);
    if (!ck.is_zero_poly()) c = poly_gcd(c, ck);
  }
  return c;
}

template <class K>
MultiPoly<K> poly_primitive(const MultiPoly<K>& p, int var, MultiPoly<K>* content_out = nullptr) {
  MultiPoly<K> c = poly_content(p, var);
  if (content_out) *content_out = c;
  MultiPoly<K> quot;
  if (!divide_exact(p, c, quot)) throw std::logic_error("poly_primitive: content does not divide");
  return quot;
}

// Pseudo-remainder of u by v in variable var (u, v nonzero, deg_var u >= deg_var v).
template <class K>
MultiPoly<K> pseudo_rem(MultiPoly<K> u, const MultiPoly<K>& v, int var) {
  int dv = degree_in(v, var);
  MultiPoly<K> lv = coeff_of(v, var, dv);
  while (!u.is_zero_poly() && degree_in(u, var) >= dv) {
    int du = degree_in(u, var);
    MultiPoly<K> lu = coeff_of(u, var, du);
    MultiPoly<K> shift = MultiPoly<K>::variable(u.ring, var, u.leading().second / u.leading().second);
    MultiPoly<K> xs = poly_pow(shift, (unsigned)(du - dv));
    u = lv * u - (lu * xs) * v;
  }
  return u;
}

template <class K>
MultiPoly<K> poly_gcd(const MultiPoly<K>& p, const MultiPoly<K>& q) {
  if (p.is_zero_poly()) return q.is_zero_poly() ? p : normalize_scalar(q);
  if (q.is_zero_poly()) return normalize_scalar(p);
  int var = detail::first_active_var(p, q);
  if (var < 0) {
    // both nonzero constants: the gcd is a unit
    K one = p.leading().second / p.leading().second;
    return MultiPoly<K>::constant(p.ring, one);
  }
  if (degree_in(p, var) == 0 || degree_in(q, var) == 0) {
    // one input is free of the main variable: gcd divides its content side
    const MultiPoly<K>& flat = degree_in(p, var) == 0 ? p : q;
    const MultiPoly<K>& tall = degree_in(p, var) == 0 ? q : p;
    return normalize_scalar(poly_gcd(flat, poly_content(tall, var)));
  }
  MultiPoly<K> cp, cq;
  MultiPoly<K> a = poly_primitive(p, var, &cp);
  MultiPoly<K> b = poly_primitive(q, var, &cq);
  if (degree_in(a, var) < degree_in(b, var)) std::swap(a, b);
  while (!b.is_zero_poly()) {
    MultiPoly<K> r = pseudo_rem(a, b, var);
    a = b;
    b = r.is_zero_poly() ? r : poly_primitive(r, var);
    if (!b.is_zero_poly() && degree_in(a, var) < degree_in(b, var)) std::swap(a, b);
  }
  MultiPoly<K> cont = poly_gcd(cp, cq);
  return normalize_scalar(cont * a);
}

struct TrialDivideReport {
  std::vector<int> exponents;
  bool zero_input = false;
};

// Strips maximal powers of each candidate off p; p becomes the remainder.
template <class K>
TrialDivideReport trial_divide(MultiPoly<K>& p, const std::vector<MultiPoly<K>>& candidates) {
  TrialDivideReport rep;
  rep.exponents.assign(candidates.size(), 0);
  if (p.is_zero_poly()) {
    rep.zero_input = true;
    return rep;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].total_degree() < 1)
      throw std::invalid_argument("trial_divide: constant candidate");
    MultiPoly<K> quot;
    while (divide_exact(p, candidates[i], quot)) {
      p = quot;
      ++rep.exponents[i];
    }
  }
  return rep;
}

template <class K>
TrialDivideReport trial_divide_copy(const MultiPoly<K>& p, const std::vector<MultiPoly<K>>& candidates,
                                    MultiPoly<K>& remainder) {
  remainder = p;
  return trial_divide(remainder, candidates);
}

}  // namespace kmap
