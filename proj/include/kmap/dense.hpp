#pragma once
// Dense homogeneous trivariate arithmetic over F_p for deep degree-sequence
// runs.  A homogeneous polynomial of degree d is a triangular array indexed
// by (e1, e2) with e0 = d - e1 - e2.  Multiplication dehomogenizes to a
// dense bivariate convolution, Kronecker-packs it to one variable, and uses
// an NTT when the prime supports it (schoolbook otherwise).

#include <array>
#include <cstdint>
#include <queue>
#include <random>
#ifdef KMAP_DENSE_TRACE
#include <chrono>
#include <cstdio>
#endif
#include <string>
#include <vector>

#include "kmap/gcd.hpp"
#include "kmap/poly.hpp"
#include "kmap/projmap.hpp"

namespace kmap {

// ---------------------------------------------------------------------------
// Modular helpers
// ---------------------------------------------------------------------------
inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return (std::uint64_t)((unsigned __int128)a * b % p);
}
inline std::uint64_t addmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  std::uint64_t s = a + b;
  if (s >= p || s < a) s -= p;
  return s;
}
inline std::uint64_t submod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return a >= b ? a - b : a + p - b;
}
inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, p);
    a = mulmod_u64(a, a, p);
    e >>= 1;
  }
  return r;
}
inline std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t p) { return powmod_u64(a, p - 2, p); }

// ---------------------------------------------------------------------------
// NTT context: an element of maximal two-power order mod p
// ---------------------------------------------------------------------------
struct NttCtx {
  std::uint64_t p = 0;
  int s2 = 0;               // 2^s2 is the largest power of two dividing p-1
  std::uint64_t root = 0;   // element of exact order 2^s2
};

inline NttCtx make_ntt_context(std::uint64_t p) {
  NttCtx ctx;
  ctx.p = p;
  std::uint64_t m = p - 1;
  while ((m & 1) == 0) {
    m >>= 1;
    ++ctx.s2;
  }
  std::uint64_t odd = (p - 1) >> ctx.s2;
  for (std::uint64_t x = 2;; ++x) {
    std::uint64_t y = powmod_u64(x, odd, p);
    if (ctx.s2 == 0) { ctx.root = 1; break; }
    if (powmod_u64(y, 1ull << (ctx.s2 - 1), p) != 1) { ctx.root = y; break; }
  }
  return ctx;
}

// A random prime p = r*2^26 + 1 in [2^61, 2^62), so transforms up to 2^26.
inline std::uint64_t random_ntt_prime(std::mt19937_64& rng) {
  for (;;) {
    std::uint64_t r = (rng() % (1ull << 35)) + (1ull << 35);  // r in [2^35, 2^36)
    std::uint64_t p = (r << 26) + 1;
    if (is_prime_u64(p)) return p;
  }
}

inline void ntt_inplace(std::vector<std::uint64_t>& a, bool invert, const NttCtx& ctx) {
  const std::uint64_t p = ctx.p;
  const std::size_t n = a.size();
  int lg = 0;
  while ((1u << lg) < n) ++lg;
  if ((std::size_t(1) << lg) != n || lg > ctx.s2)
    throw std::invalid_argument("ntt_inplace: unsupported length for this prime");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::uint64_t wlen = powmod_u64(ctx.root, (std::uint64_t(1) << ctx.s2) / len, p);
    if (invert) wlen = invmod_u64(wlen, p);
    for (std::size_t i = 0; i < n; i += len) {
      std::uint64_t w = 1;
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::uint64_t u = a[i + j];
        std::uint64_t v = mulmod_u64(a[i + j + len / 2], w, p);
        a[i + j] = addmod_u64(u, v, p);
        a[i + j + len / 2] = submod_u64(u, v, p);
        w = mulmod_u64(w, wlen, p);
      }
    }
  }
  if (invert) {
    std::uint64_t ninv = invmod_u64((std::uint64_t)n % p, p);
    for (auto& x : a) x = mulmod_u64(x, ninv, p);
  }
}

// Linear convolution mod p.  Schoolbook for small inputs or when the prime
// lacks the needed two-power torsion.
inline std::vector<std::uint64_t> conv_mod(const std::vector<std::uint64_t>& a,
                                           const std::vector<std::uint64_t>& b, const NttCtx& ctx) {
  if (a.empty() || b.empty()) return {};
  std::size_t rl = a.size() + b.size() - 1;
  std::size_t n = 1;
  int lg = 0;
  while (n < rl) {
    n <<= 1;
    ++lg;
  }
  bool small = (double)a.size() * (double)b.size() < 1.5e7;
  if (small || lg > ctx.s2) {
    if (lg > ctx.s2 && !small && (double)a.size() * (double)b.size() > 1e10)
      throw std::runtime_error("conv_mod: input too large for schoolbook with a non-NTT prime");
    std::vector<std::uint64_t> r(rl, 0);
    const std::uint64_t p = ctx.p;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      unsigned __int128 ai = a[i];
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] == 0) continue;
        r[i + j] = (std::uint64_t)((ai * b[j] + r[i + j]) % p);
      }
    }
    return r;
  }
  std::vector<std::uint64_t> fa(a.begin(), a.end()), fb(b.begin(), b.end());
  fa.resize(n, 0);
  fb.resize(n, 0);
  ntt_inplace(fa, false, ctx);
  ntt_inplace(fb, false, ctx);
  for (std::size_t i = 0; i < n; ++i) fa[i] = mulmod_u64(fa[i], fb[i], ctx.p);
  ntt_inplace(fa, true, ctx);
  fa.resize(rl);
  return fa;
}

// ---------------------------------------------------------------------------
// Dense homogeneous trivariate polynomials
// ---------------------------------------------------------------------------
struct DenseHom {
  int d = -1;  // -1 encodes the zero polynomial
  std::vector<std::uint64_t> c;

  static std::size_t tri(int d) { return (std::size_t)(d + 1) * (d + 2) / 2; }
  // row e1 starts after rows 0..e1-1 of lengths (d+1), d, ...
  std::size_t row(int e1) const { return (std::size_t)e1 * (d + 1) - (std::size_t)e1 * (e1 - 1) / 2; }
  std::size_t idx(int e1, int e2) const { return row(e1) + e2; }

  static DenseHom zero() { return DenseHom{}; }
  static DenseHom make(int deg) {
    DenseHom h;
    h.d = deg;
    h.c.assign(tri(deg), 0);
    return h;
  }
  bool is_zero() const {
    if (d < 0) return true;
    for (auto x : c)
      if (x) return false;
    return true;
  }
  std::size_t nonzero_count() const {
    std::size_t n = 0;
    for (auto x : c)
      if (x) ++n;
    return n;
  }
};

inline DenseHom dense_from_sparse(const MultiPoly<Fp>& p) {
  if (p.is_zero_poly()) return DenseHom::zero();
  if (!p.is_homogeneous()) throw std::invalid_argument("dense_from_sparse: not homogeneous");
  DenseHom h = DenseHom::make(p.total_degree());
  for (auto& t : p.terms) h.c[h.idx(t.first.e[1], t.first.e[2])] = t.second.v;
  return h;
}

inline MultiPoly<Fp> sparse_from_dense(const DenseHom& h, RingPtr ring, std::uint64_t p) {
  MultiPoly<Fp> out(ring);
  if (h.d < 0) return out;
  for (int e1 = 0; e1 <= h.d; ++e1)
    for (int e2 = 0; e2 + e1 <= h.d; ++e2) {
      std::uint64_t v = h.c[h.idx(e1, e2)];
      if (!v) continue;
      Monomial m;
      m.nv = (std::uint8_t)ring->size();
      m.e[0] = (std::uint16_t)(h.d - e1 - e2);
      m.e[1] = (std::uint16_t)e1;
      m.e[2] = (std::uint16_t)e2;
      out.terms.emplace_back(m, Fp(v, p));
    }
  out.normalize_order();
  return out;
}

inline DenseHom dense_mul(const DenseHom& a, const DenseHom& b, const NttCtx& ctx) {
  if (a.d < 0 || b.d < 0) return DenseHom::zero();
  int dc = a.d + b.d;
  std::size_t M = (std::size_t)dc + 1;  // Kronecker base: e1 + M*e2 is collision-free
  std::vector<std::uint64_t> pa(M * M, 0), pb(M * M, 0);
  for (int e1 = 0; e1 <= a.d; ++e1)
    for (int e2 = 0; e2 + e1 <= a.d; ++e2) pa[e1 + M * e2] = a.c[a.idx(e1, e2)];
  for (int e1 = 0; e1 <= b.d; ++e1)
    for (int e2 = 0; e2 + e1 <= b.d; ++e2) pb[e1 + M * e2] = b.c[b.idx(e1, e2)];
  // trim trailing zeros to keep the transform tight
  while (!pa.empty() && pa.back() == 0) pa.pop_back();
  while (!pb.empty() && pb.back() == 0) pb.pop_back();
  std::vector<std::uint64_t> pc = conv_mod(pa, pb, ctx);
  DenseHom out = DenseHom::make(dc);
  for (int e1 = 0; e1 <= dc; ++e1)
    for (int e2 = 0; e2 + e1 <= dc; ++e2) {
      std::size_t k = e1 + M * e2;
      if (k < pc.size()) out.c[out.idx(e1, e2)] = pc[k];
    }
  return out;
}

// acc += coef * b (equal degrees; acc may start as zero)
inline void dense_add_scaled(DenseHom& acc, const DenseHom& b, std::uint64_t coef, std::uint64_t p) {
  if (coef == 0 || b.d < 0) return;
  if (acc.d < 0) acc = DenseHom::make(b.d);
  if (acc.d != b.d) throw std::invalid_argument("dense_add_scaled: degree mismatch");
  for (std::size_t i = 0; i < acc.c.size(); ++i)
    if (b.c[i]) acc.c[i] = (std::uint64_t)(((unsigned __int128)b.c[i] * coef + acc.c[i]) % p);
}

// ---------------------------------------------------------------------------
// Exact division by a sparse homogeneous divisor with few terms
// ---------------------------------------------------------------------------
struct SparseDivisor {
  int d = 0;
  // gradlex-descending terms as (e1, e2, coeff); e0 = d - e1 - e2
  std::vector<std::array<std::uint64_t, 3>> terms;
  std::string name;
};

inline SparseDivisor divisor_from_sparse(const MultiPoly<Fp>& q, std::string name) {
  if (q.is_zero_poly() || !q.is_homogeneous())
    throw std::invalid_argument("divisor_from_sparse: need nonzero homogeneous input");
  SparseDivisor out;
  out.d = q.total_degree();
  out.name = std::move(name);
  for (auto& t : q.terms) out.terms.push_back({t.first.e[1], t.first.e[2], t.second.v});
  return out;
}

inline bool dense_divide_exact(const DenseHom& a, const SparseDivisor& q, std::uint64_t p,
                               DenseHom& quot) {
  if (a.d < 0) {
    quot = DenseHom::zero();
    return true;
  }
  if (a.d < q.d) return false;
  const int E1 = (int)q.terms[0][0], E2 = (int)q.terms[0][1];
  const std::uint64_t lcinv = invmod_u64(q.terms[0][2], p);
  DenseHom w = a;
  DenseHom out = DenseHom::make(a.d - q.d);
  // gradlex-descending scan: e0 = d - s descending, then e1 descending
  for (int s = 0; s <= a.d; ++s) {
    for (int e1 = s; e1 >= 0; --e1) {
      int e2 = s - e1;
      std::uint64_t v = w.c[w.idx(e1, e2)];
      if (v == 0) continue;
      int q1 = e1 - E1, q2 = e2 - E2;
      if (q1 < 0 || q2 < 0 || q1 + q2 > out.d) return false;
      std::uint64_t qc = mulmod_u64(v, lcinv, p);
      out.c[out.idx(q1, q2)] = qc;
      for (auto& t : q.terms) {
        int t1 = q1 + (int)t[0], t2 = q2 + (int)t[1];
        std::uint64_t sub = mulmod_u64(qc, t[2], p);
        std::size_t pos = w.idx(t1, t2);
        w.c[pos] = submod_u64(w.c[pos], sub, p);
      }
    }
  }
  quot = std::move(out);
  return true;
}

// ---------------------------------------------------------------------------
// Random-line restriction: the univariate gcd degree of the restricted
// components equals (w.h.p.) the degree of any remaining common factor.
// ---------------------------------------------------------------------------
inline std::vector<std::uint64_t> dense_restrict_line(const DenseHom& a, std::uint64_t c1,
                                                      std::uint64_t c2, std::uint64_t p) {
  // substitute x0 = 1, x1 = u, x2 = c1*u + c2; Horner over the x2-exponent
  if (a.d < 0) return {};
  std::vector<std::uint64_t> r;  // polynomial in u, r[i] = coeff of u^i
  for (int j = a.d; j >= 0; --j) {
    // r = r * (c1*u + c2) + column_j(u)
    std::vector<std::uint64_t> nr(r.size() + 1, 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i]) continue;
      nr[i + 1] = (std::uint64_t)(((unsigned __int128)r[i] * c1 + nr[i + 1]) % p);
      nr[i] = (std::uint64_t)(((unsigned __int128)r[i] * c2 + nr[i]) % p);
    }
    for (int e1 = 0; e1 + j <= a.d; ++e1) {
      std::uint64_t v = a.c[a.idx(e1, j)];
      if (v) nr[e1] = addmod_u64(nr[e1], v, p);
    }
    r = std::move(nr);
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

// ---------------------------------------------------------------------------
// Univariate dense helpers mod p (coefficient vectors, ascending)
// ---------------------------------------------------------------------------
namespace uni {

using Vec = std::vector<std::uint64_t>;

inline void trim(Vec& w) {
  while (!w.empty() && w.back() == 0) w.pop_back();
}
inline int deg(const Vec& w) { return (int)w.size() - 1; }

inline Vec rem(Vec u, const Vec& v, std::uint64_t p) {
  std::uint64_t lcinv = invmod_u64(v.back(), p);
  while (u.size() >= v.size()) {
    std::uint64_t f = mulmod_u64(u.back(), lcinv, p);
    std::size_t off = u.size() - v.size();
    for (std::size_t i = 0; i < v.size(); ++i)
      u[off + i] = submod_u64(u[off + i], mulmod_u64(f, v[i], p), p);
    trim(u);
    if (u.empty()) break;
  }
  return u;
}

inline Vec gcd(Vec u, Vec v, std::uint64_t p) {
  trim(u);
  trim(v);
  while (!v.empty()) {
    Vec r = rem(std::move(u), v, p);
    u = std::move(v);
    v = std::move(r);
  }
  if (!u.empty()) {
    std::uint64_t inv = invmod_u64(u.back(), p);
    for (auto& x : u) x = mulmod_u64(x, inv, p);
  }
  return u;
}

// exact division; false when the remainder is nonzero
inline bool divexact(const Vec& a, const Vec& b, std::uint64_t p, Vec& q) {
  if (b.empty()) throw std::domain_error("uni::divexact: division by zero");
  Vec u = a;
  trim(u);
  if (u.empty()) {
    q.clear();
    return true;
  }
  if (u.size() < b.size()) return false;
  q.assign(u.size() - b.size() + 1, 0);
  std::uint64_t lcinv = invmod_u64(b.back(), p);
  for (std::size_t i = u.size(); i-- >= b.size();) {
    std::uint64_t f = mulmod_u64(u[i], lcinv, p);
    if (f) {
      q[i - b.size() + 1] = f;
      std::size_t off = i - b.size() + 1;
      for (std::size_t j = 0; j < b.size(); ++j)
        u[off + j] = submod_u64(u[off + j], mulmod_u64(f, b[j], p), p);
    }
    if (i == 0) break;
  }
  for (auto x : u)
    if (x) return false;
  return true;
}

inline std::uint64_t eval(const Vec& w, std::uint64_t t, std::uint64_t p) {
  std::uint64_t r = 0;
  for (std::size_t i = w.size(); i-- > 0;) {
    r = mulmod_u64(r, t, p);
    r = addmod_u64(r, w[i], p);
  }
  return r;
}

// Newton interpolation through (ts[j], ys[j]); returns monomial coefficients.
inline Vec interpolate(const Vec& ts, const Vec& ys, std::uint64_t p) {
  std::size_t m = ts.size();
  Vec dd(ys);  // divided differences, built in place
  for (std::size_t lvl = 1; lvl < m; ++lvl)
    for (std::size_t j = m - 1; j >= lvl; --j) {
      std::uint64_t num = submod_u64(dd[j], dd[j - 1], p);
      std::uint64_t den = submod_u64(ts[j], ts[j - lvl], p);
      dd[j] = mulmod_u64(num, invmod_u64(den, p), p);
      if (j == lvl) break;
    }
  Vec res, basis{1};
  res.assign(m, 0);
  basis.reserve(m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (dd[j])
      for (std::size_t i = 0; i < basis.size(); ++i)
        res[i] = (std::uint64_t)(((unsigned __int128)basis[i] * dd[j] + res[i]) % p);
    if (j + 1 < m) {
      // basis *= (x - ts[j])
      basis.push_back(0);
      std::uint64_t neg = ts[j] ? p - ts[j] : 0;
      for (std::size_t i = basis.size() - 1; i-- > 0;) {
        basis[i + 1] = addmod_u64(basis[i + 1], basis[i], p);
        basis[i] = mulmod_u64(basis[i], neg, p);
      }
    }
  }
  trim(res);
  return res;
}

}  // namespace uni

inline int poly1_gcd_degree(std::vector<std::uint64_t> u, std::vector<std::uint64_t> v,
                            std::uint64_t p) {
  auto trim = [](std::vector<std::uint64_t>& w) {
    while (!w.empty() && w.back() == 0) w.pop_back();
  };
  trim(u);
  trim(v);
  while (!v.empty()) {
    // u mod v
    std::uint64_t lcinv = invmod_u64(v.back(), p);
    while (u.size() >= v.size()) {
      std::uint64_t f = mulmod_u64(u.back(), lcinv, p);
      std::size_t off = u.size() - v.size();
      for (std::size_t i = 0; i < v.size(); ++i)
        u[off + i] = submod_u64(u[off + i], mulmod_u64(f, v[i], p), p);
      trim(u);
      if (u.empty()) break;
    }
    std::swap(u, v);
    trim(v);
  }
  return u.empty() ? -1 : (int)u.size() - 1;
}

// ---------------------------------------------------------------------------
// Residual common-factor removal (modular bivariate gcd, shear normalized).
// The components are read affinely (x0 = 1) as bivariate polynomials in
// (x1, x2).  A random shear x2 -> lambda*x1 + x2 makes every leading
// x1-coefficient a nonzero constant, so the monic univariate gcds at
// x2 = t are consistent images of one bivariate gcd, and the cofactors can
// be interpolated directly from exact univariate divisions (the single
// unknown constant is common to all three components, hence projectively
// irrelevant).  O(N^3) scalar work mod p for components of degree N.
// ---------------------------------------------------------------------------
namespace detail_dense {

// largest e1 + e2 over the nonzero terms (total degree after setting x0 = 1)
inline int affine_degree(const DenseHom& a) {
  for (int s = a.d; s >= 0; --s)
    for (int e1 = 0; e1 <= s; ++e1)
      if (a.c[a.idx(e1, s - e1)]) return s;
  return -1;
}

}  // namespace detail_dense

// Removes the full common factor of the (already catalogue-stripped) triple.
// `total_deg` is the factor's total degree from the caller's line probe.
inline void dense_remove_residual(std::array<DenseHom, 3>& comp, int total_deg, std::uint64_t p,
                                  std::mt19937_64& rng) {
  using detail_dense::affine_degree;
  const int N = comp[0].d;
  std::array<int, 3> da{};
  for (int i = 0; i < 3; ++i) da[i] = affine_degree(comp[i]);
  int gg = total_deg;
  int restarts = 0;

restart:
  if (++restarts > 30) throw std::logic_error("dense_remove_residual: shear selection failed");
  // shear parameter: generic iff no top form vanishes at (1, lambda)
  std::uint64_t lam = 1 + rng() % (p - 1);
  const int M2 = N - gg + 1;  // interpolation points for the cofactor rows
  std::vector<std::uint64_t> ts;
  std::vector<std::array<uni::Vec, 3>> qv;  // cofactor images per point
  std::uint64_t t = 0;
  int misses = 0, min_seen = -1;
  while ((int)ts.size() < M2) {
    t = (t + 1 + rng() % 7) % p;
    if (t == 0) continue;
    std::array<uni::Vec, 3> v;
    for (int i = 0; i < 3; ++i) {
      v[i] = dense_restrict_line(comp[i], lam, t, p);
      if (uni::deg(v[i]) != da[i]) goto restart;  // bad lambda (prob ~ N/p)
    }
    uni::Vec g;
    for (int i = 0; i < 3; ++i)
      if (!v[i].empty()) g = g.empty() ? v[i] : uni::gcd(std::move(g), v[i], p);
    int dg = uni::deg(g);
    if (dg != gg) {
      if (min_seen < 0 || dg < min_seen) min_seen = dg;
      // a persistent smaller degree means the caller's probe overshot
      if (++misses > 50 && min_seen < gg) {
        gg = min_seen;
        if (gg <= 0) return;  // the probe factor was an artifact
        goto restart;
      }
      if (misses > 50 * M2 + 1000)
        throw std::logic_error("dense_remove_residual: no usable evaluation points");
      continue;  // dg > gg: unlucky point, resample
    }
    std::array<uni::Vec, 3> q;
    for (int i = 0; i < 3; ++i)
      if (!v[i].empty() && !uni::divexact(v[i], g, p, q[i]))
        throw std::logic_error("dense_remove_residual: gcd image does not divide");
    ts.push_back(t);
    qv.push_back(std::move(q));
  }
  // interpolate the sheared cofactors row by row (row e1 = coefficient of
  // x1^e1, a polynomial in the sheared x2 of degree at most N - gg - e1)
  const int Nr = N - gg;
  std::array<DenseHom, 3> out;
  std::vector<std::vector<std::uint64_t>> grid((std::size_t)Nr + 1);
  uni::Vec ys(ts.size());
  for (int i = 0; i < 3; ++i) {
    for (int e1 = 0; e1 <= Nr; ++e1) {
      for (std::size_t j = 0; j < ts.size(); ++j)
        ys[j] = e1 < (int)qv[j][i].size() ? qv[j][i][e1] : 0;
      uni::Vec row = uni::interpolate(ts, ys, p);
      if ((int)row.size() - 1 > Nr - e1)
        throw std::logic_error("dense_remove_residual: cofactor degree out of range");
      row.resize((std::size_t)(Nr - e1 + 1), 0);
      grid[e1] = std::move(row);
    }
    // undo the shear: substitute x2 -> x2 - lambda*x1, Horner over the
    // x2-exponent on a (e1, e2)-indexed square accumulator
    std::vector<std::vector<std::uint64_t>> acc(
        (std::size_t)Nr + 1, std::vector<std::uint64_t>((std::size_t)Nr + 1, 0));
    std::uint64_t nlam = p - lam;
    for (int j = Nr; j >= 0; --j) {
      // acc = acc * (x2 - lambda*x1) + column_j(x1)
      for (int s = Nr - j - 1; s >= 0; --s)  // only degrees <= Nr - j - 1 are live
        for (int e1 = 0; e1 <= s; ++e1) {
          int e2 = s - e1;
          std::uint64_t cvl = acc[e1][e2];
          if (!cvl) continue;
          acc[e1][e2 + 1] = addmod_u64(acc[e1][e2 + 1], cvl, p);
          acc[e1 + 1][e2] = addmod_u64(acc[e1 + 1][e2], mulmod_u64(cvl, nlam, p), p);
          acc[e1][e2] = 0;
        }
      for (int e1 = 0; e1 + j <= Nr; ++e1)
        if ((int)grid[e1].size() > j) acc[e1][0] = addmod_u64(acc[e1][0], grid[e1][j], p);
    }
    out[i] = DenseHom::make(Nr);
    for (int e1 = 0; e1 <= Nr; ++e1)
      for (int e2 = 0; e1 + e2 <= Nr; ++e2) out[i].c[out[i].idx(e1, e2)] = acc[e1][e2];
  }
  comp = std::move(out);
}

// ---------------------------------------------------------------------------
// Degree-sequence iterator over F_p
// ---------------------------------------------------------------------------
struct DenseIterator {
  std::uint64_t p = 0;
  NttCtx ctx;
  int D = 0;  // degree of the map being iterated
  // kc[i][a][b] = coefficient of x0^a x1^b x2^(D-a-b) in component i
  std::array<std::vector<std::vector<std::uint64_t>>, 3> kc;
  std::vector<SparseDivisor> cands;
  std::array<DenseHom, 3> cur;
  int d = 0;  // current iterate degree
  std::mt19937_64 rng;
  RingPtr ring;  // for the sparse-gcd fallback

  DenseIterator(const ProjMap<Fp>& k, const std::vector<MultiPoly<Fp>>& candidates,
                std::uint64_t prime, std::uint64_t seed)
      : p(prime), ctx(make_ntt_context(prime)), rng(seed), ring(k.ring()) {
    D = k.degree();
    for (int i = 0; i < 3; ++i) {
      kc[i].assign(D + 1, std::vector<std::uint64_t>(D + 1, 0));
      if (!k.comp[i].is_homogeneous() || k.comp[i].total_degree() != D)
        throw std::invalid_argument("DenseIterator: map components must share one degree");
      for (auto& t : k.comp[i].terms) kc[i][t.first.e[0]][t.first.e[1]] = t.second.v;
      cur[i] = dense_from_sparse(k.comp[i]);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i)
      cands.push_back(divisor_from_sparse(candidates[i], "cand" + std::to_string(i)));
    d = D;
  }

  // one composition + normalization; appends any fallback note to warnings
  void step(std::vector<std::string>& warnings) {
#ifdef KMAP_DENSE_TRACE
    auto tc0 = std::chrono::steady_clock::now();
#endif
    // powers of cur[2] up to D
    std::vector<DenseHom> pow2(D + 1);
    pow2[0] = DenseHom::make(0);
    pow2[0].c[0] = 1;
    for (int j = 1; j <= D; ++j) pow2[j] = dense_mul(pow2[j - 1], cur[2], ctx);
    std::array<DenseHom, 3> next;
    for (int i = 0; i < 3; ++i) {
      DenseHom G = DenseHom::zero();
      for (int a = D; a >= 0; --a) {
        if (G.d >= 0) G = dense_mul(G, cur[0], ctx);
        // R = sum_b kc[i][a][b] * x1^b x2^(D-a-b) evaluated on cur, Horner in x1
        DenseHom R = DenseHom::zero();
        for (int b = D - a; b >= 0; --b) {
          if (R.d >= 0) R = dense_mul(R, cur[1], ctx);
          std::uint64_t coef = kc[i][a][b];
          if (coef) dense_add_scaled(R, pow2[D - a - b], coef, p);
        }
        if (R.d >= 0) {
          if (G.d < 0)
            G = std::move(R);
          else
            dense_add_scaled(G, R, 1, p);
        }
      }
      if (G.d < 0) G = DenseHom::make(D * d);  // identically zero component
      next[i] = std::move(G);
    }
#ifdef KMAP_DENSE_TRACE
    auto tc1 = std::chrono::steady_clock::now();
#endif
    // strip known contracted-curve factors
    for (auto& cand : cands) {
      for (;;) {
        std::array<DenseHom, 3> q;
        bool all = dense_divide_exact(next[0], cand, p, q[0]) &&
                   dense_divide_exact(next[1], cand, p, q[1]) &&
                   dense_divide_exact(next[2], cand, p, q[2]);
        if (!all) break;
        next = std::move(q);
      }
    }
    // factor out any common power of x0 (invisible to the affine line probe)
    {
      int c0 = next[0].d + 1;
      for (auto& a : next) {
        int da = detail_dense::affine_degree(a);
        if (da >= 0) c0 = std::min(c0, a.d - da);
      }
      if (c0 > 0 && c0 <= next[0].d) {
        for (auto& a : next) {
          DenseHom b = DenseHom::make(a.d - c0);
          for (int e1 = 0; e1 <= b.d; ++e1)
            for (int e2 = 0; e1 + e2 <= b.d; ++e2) b.c[b.idx(e1, e2)] = a.c[a.idx(e1, e2)];
          a = std::move(b);
        }
      }
    }
#ifdef KMAP_DENSE_TRACE
    auto tc2 = std::chrono::steady_clock::now();
#endif
    // random-line check for a residual common factor
    std::uint64_t c1 = rng() % p, c2 = rng() % p;
    auto u0 = dense_restrict_line(next[0], c1, c2, p);
    auto u1 = dense_restrict_line(next[1], c1, c2, p);
    auto u2 = dense_restrict_line(next[2], c1, c2, p);
    int g01 = poly1_gcd_degree(u0, u1, p);
    int gg = g01 < 0 ? (int)u2.size() - 1 : 0;
    if (g01 > 0) {
      // refine with the third component
      std::vector<std::uint64_t> g;  // recompute actual gcd polynomial
      // cheap: gcd degree of (u0,u1) vs u2 via one more Euclid on restrictions
      // of the pair gcd is overkill; use gcd(gcd01-degree proxy): compute gcd
      // polynomial of u0,u1 then its gcd degree with u2
      auto gcd_poly = [&](std::vector<std::uint64_t> x, std::vector<std::uint64_t> y) {
        auto trim = [](std::vector<std::uint64_t>& w) {
          while (!w.empty() && w.back() == 0) w.pop_back();
        };
        trim(x);
        trim(y);
        while (!y.empty()) {
          std::uint64_t lcinv = invmod_u64(y.back(), p);
          while (x.size() >= y.size()) {
            std::uint64_t f = mulmod_u64(x.back(), lcinv, p);
            std::size_t off = x.size() - y.size();
            for (std::size_t i = 0; i < y.size(); ++i)
              x[off + i] = submod_u64(x[off + i], mulmod_u64(f, y[i], p), p);
            trim(x);
            if (x.empty()) break;
          }
          std::swap(x, y);
          trim(y);
        }
        return x;
      };
      g = gcd_poly(gcd_poly(u0, u1), u2);
      gg = g.empty() ? -1 : (int)g.size() - 1;
    }
    for (int pass = 0; gg > 0; ++pass) {
      if (pass >= 3) throw std::logic_error("dense step: residual factor removal did not converge");
      dense_remove_residual(next, gg, p, rng);
      // re-probe on a fresh line; a second round is only needed if the probe
      // degree was an unlucky undercount
      std::uint64_t d1 = rng() % p, d2 = rng() % p;
      auto w0 = dense_restrict_line(next[0], d1, d2, p);
      auto w1 = dense_restrict_line(next[1], d1, d2, p);
      auto w2 = dense_restrict_line(next[2], d1, d2, p);
      int h01 = poly1_gcd_degree(w0, w1, p);
      gg = 0;
      if (h01 > 0) {
        uni::Vec h = uni::gcd(uni::gcd(w0, w1, p), w2, p);
        gg = h.empty() ? 0 : uni::deg(h);
      }
    }
    cur = std::move(next);
    d = cur[0].d;
#ifdef KMAP_DENSE_TRACE
    auto tc3 = std::chrono::steady_clock::now();
    auto el = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    std::fprintf(stderr, "[trace] compose=%.2fs strip=%.2fs residual=%.2fs -> d=%d\n",
                 el(tc0, tc1), el(tc1, tc2), el(tc2, tc3), d);
#endif
  }

  std::size_t term_count() const {
    return cur[0].nonzero_count() + cur[1].nonzero_count() + cur[2].nonzero_count();
  }
};

// One prime-field degree-sequence run.
inline DegreeSequenceResult degree_sequence_modp(const FamilyParams& par, int m_max,
                                                 std::uint64_t prime, std::size_t term_budget,
                                                 std::uint64_t seed) {
  par.validate();
  RingPtr ring = plane_ring();
  Fp one(1, prime);
  auto a = coeff_polys(par, ring, one);
  ProjMap<Fp> k = par.n >= 1 ? build_k(ring, a, one)
                             : compose(build_jf(ring, a, one), build_iota(ring, one), {}, true);
  std::vector<MultiPoly<Fp>> cands;
  if (par.n >= 1) cands = make_catalog(par, ring, one).forward_defining();
  DegreeSequenceResult res;
  res.budget = term_budget;
  res.prime = prime;
  DenseIterator it(k, cands, prime, seed);
  res.degrees.push_back(it.d);
  for (int m = 2; m <= m_max; ++m) {
    if (it.term_count() > term_budget) {
      res.budget_exceeded = true;
      break;
    }
    it.step(res.warnings);
    res.degrees.push_back(it.d);
  }
  return res;
}

// Degree sequence with the mode dispatch and the unlucky-prime safeguard:
// prime-field runs are repeated with an independent prime, and any d_m on
// which the two runs disagree is reported as the larger value with a warning
// (degrees mod p can only undershoot the rational degrees).
inline DegreeSequenceResult degree_sequence(const FamilyParams& par, int m_max, ArithmeticMode mode,
                                            std::uint64_t prime = 0,
                                            std::size_t term_budget = 2000000,
                                            std::uint64_t seed = 20240901) {
  if (mode == ArithmeticMode::Rational) return degree_sequence_rational(par, m_max, term_budget);
  std::mt19937_64 rng(seed);
  std::uint64_t p1 = prime ? prime : random_ntt_prime(rng);
  std::uint64_t p2 = random_ntt_prime(rng);
  if (p2 == p1) p2 = random_ntt_prime(rng);
  DegreeSequenceResult r1 = degree_sequence_modp(par, m_max, p1, term_budget, rng());
  DegreeSequenceResult r2 = degree_sequence_modp(par, m_max, p2, term_budget, rng());
  std::size_t common = std::min(r1.degrees.size(), r2.degrees.size());
  for (std::size_t i = 0; i < common; ++i)
    if (r1.degrees[i] != r2.degrees[i]) {
      r1.warnings.push_back("prime collapse at m = " + std::to_string(i + 1) + ": deg " +
                            std::to_string(std::min(r1.degrees[i], r2.degrees[i])) + " vs " +
                            std::to_string(std::max(r1.degrees[i], r2.degrees[i])) +
                            "; reporting the larger value");
      r1.degrees[i] = std::max(r1.degrees[i], r2.degrees[i]);
    }
  for (auto& w : r2.warnings) r1.warnings.push_back("second prime: " + w);
  return r1;
}

}  // namespace kmap
