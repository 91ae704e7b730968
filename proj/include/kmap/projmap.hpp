#pragma once
// The birational family on the projective plane: builders for the two
// involutions and their composition, the inverse map, composition and
// normalization, degree sequences, Jacobian factorization, and the
// exceptional-curve catalogue.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kmap/gcd.hpp"
#include "kmap/poly.hpp"

namespace kmap {

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------
template <class K>
struct ProjPoint {
  std::array<K, 3> x;

  // Scale so the first nonzero coordinate is 1.
  void canonicalize() {
    for (auto& c : x)
      if (!is_zero(c)) {
        K inv = c / c / c;  // 1/c
        for (auto& d : x) d = d * inv;
        return;
      }
    throw std::invalid_argument("ProjPoint: all coordinates zero");
  }
  friend bool operator==(const ProjPoint& a, const ProjPoint& b) {
    // all 2x2 minors of the coordinate pair vanish
    return is_zero(K(a.x[0] * b.x[1] - a.x[1] * b.x[0])) &&
           is_zero(K(a.x[0] * b.x[2] - a.x[2] * b.x[0])) &&
           is_zero(K(a.x[1] * b.x[2] - a.x[2] * b.x[1]));
  }
};

// ---------------------------------------------------------------------------
// Family parameters: F(z) = sum a_j z^j, with the affine embedding
// (x, y) -> [1 : x : y].
// ---------------------------------------------------------------------------
struct FamilyParams {
  int n = 1;
  std::vector<Rat> coeffs;  // a_0 ... a_n

  void validate() const {
    if (n < 0) throw std::invalid_argument("FamilyParams: n < 0");
    if ((int)coeffs.size() != n + 1)
      throw std::invalid_argument("FamilyParams: coefficient count != n+1");
    if (n >= 1 && coeffs[n] == 0)
      throw std::invalid_argument("FamilyParams: leading coefficient zero");
  }
  // The degree-3 automorphism subfamily F = a z^3 + a z^2 + b z + 2.
  bool is_cubic_family() const {
    return n == 3 && coeffs[3] != 0 && coeffs[2] == coeffs[3] && coeffs[0] == 2;
  }
  static FamilyParams cubic(const Rat& a, const Rat& b) {
    FamilyParams p;
    p.n = 3;
    p.coeffs = {Rat(2), b, a, a};
    return p;
  }
};

inline RingPtr plane_ring() {
  static RingPtr r = make_ring({"x0", "x1", "x2"});
  return r;
}

// Plane ring with the family coefficients appended as extra symbols, for
// identities carried symbolically in the parameters.
inline RingPtr plane_ring_symbolic(int n) {
  std::vector<std::string> vars = {"x0", "x1", "x2"};
  for (int j = 0; j <= n; ++j) vars.push_back("a" + std::to_string(j));
  return make_ring(std::move(vars));
}

// Coefficient values of a_0..a_n as polynomials of the given ring: constants
// for a numeric run, or the ring's own parameter variables for symbolic work.
template <class K>
std::vector<MultiPoly<K>> coeff_polys(const FamilyParams& par, RingPtr ring, const K& one) {
  std::vector<MultiPoly<K>> out;
  for (int j = 0; j <= par.n; ++j) {
    int idx = ring->index("a" + std::to_string(j));
    if (idx >= 0) out.push_back(MultiPoly<K>::variable(ring, idx, one));
    else out.push_back(MultiPoly<K>::constant(ring, scalar_from_rational(par.coeffs[j], one)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------
template <class K>
struct ProjMap {
  std::array<MultiPoly<K>, 3> comp;
  std::string label;

  int degree() const { return comp[0].total_degree() >= 0 ? std::max({comp[0].total_degree(), comp[1].total_degree(), comp[2].total_degree()}) : -1; }
  RingPtr ring() const { return comp[0].ring; }
  bool is_homogeneous() const {
    return comp[0].is_homogeneous() && comp[1].is_homogeneous() && comp[2].is_homogeneous();
  }
  std::size_t term_count() const {
    return comp[0].term_count() + comp[1].term_count() + comp[2].term_count();
  }
};

template <class K>
ProjMap<K> identity_map(RingPtr ring, const K& one) {
  ProjMap<K> m;
  for (int i = 0; i < 3; ++i) m.comp[i] = MultiPoly<K>::variable(ring, i, one);
  m.label = "id";
  return m;
}

// Remove the common factor of the three components.  Known candidate factors
// are stripped first (cheap); a full gcd pass can be requested afterwards.
template <class K>
void normalize_map(ProjMap<K>& m, const std::vector<MultiPoly<K>>& candidates, bool full_gcd) {
  for (const auto& cand : candidates) {
    for (;;) {
      std::array<MultiPoly<K>, 3> q;
      bool all = divide_exact(m.comp[0], cand, q[0]) && divide_exact(m.comp[1], cand, q[1]) &&
                 divide_exact(m.comp[2], cand, q[2]);
      if (!all) break;
      m.comp = q;
    }
  }
  if (full_gcd) {
    MultiPoly<K> g = poly_gcd(poly_gcd(m.comp[0], m.comp[1]), m.comp[2]);
    if (g.total_degree() > 0) {
      std::array<MultiPoly<K>, 3> q;
      for (int i = 0; i < 3; ++i)
        if (!divide_exact(m.comp[i], g, q[i])) throw std::logic_error("normalize_map: gcd division failed");
      m.comp = q;
    }
  }
  // scalar convention: primitive with positive leading coefficient / monic,
  // applied with one common scale so the triple stays projectively intact
  for (int i = 0; i < 3; ++i) {
    if (m.comp[i].is_zero_poly()) continue;
    MultiPoly<K> lead = normalize_scalar(m.comp[i]);
    K scale = lead.leading().second / m.comp[i].leading().second;
    for (int j = 0; j < 3; ++j) m.comp[j] = scalar_mul(m.comp[j], scale);
    break;
  }
}

template <class K>
bool map_equal(const ProjMap<K>& a, const ProjMap<K>& b) {
  return poly_equal(a.comp[0], b.comp[0]) && poly_equal(a.comp[1], b.comp[1]) &&
         poly_equal(a.comp[2], b.comp[2]);
}

// f after g: substitute the components of g into f.
template <class K>
ProjMap<K> compose(const ProjMap<K>& f, const ProjMap<K>& g,
                   const std::vector<MultiPoly<K>>& candidates = {}, bool full_gcd = true) {
  std::vector<MultiPoly<K>> images = {g.comp[0], g.comp[1], g.comp[2]};
  // parameter variables (anything beyond x0,x1,x2) pass through unchanged
  if (f.ring()->size() > 3) {
    K one = K();
    for (auto& c : f.comp)
      if (!c.terms.empty()) one = c.leading().second / c.leading().second;
    for (int i = 3; i < f.ring()->size(); ++i)
      images.push_back(MultiPoly<K>::variable(g.ring(), g.ring()->index(f.ring()->vars[i]), one));
  }
  ProjMap<K> r;
  for (int i = 0; i < 3; ++i) r.comp[i] = substitute(f.comp[i], images);
  normalize_map(r, candidates, full_gcd);
  r.label = f.label + "∘" + g.label;
  return r;
}

struct IndeterminatePoint : std::runtime_error {
  IndeterminatePoint() : std::runtime_error("map is indeterminate at this point") {}
};

template <class K>
ProjPoint<K> apply(const ProjMap<K>& f, const ProjPoint<K>& p, const K& one) {
  std::vector<K> pt(p.x.begin(), p.x.end());
  ProjPoint<K> q;
  for (int i = 0; i < 3; ++i) q.x[i] = poly_eval(f.comp[i], pt, one);
  if (is_zero(q.x[0]) && is_zero(q.x[1]) && is_zero(q.x[2])) throw IndeterminatePoint();
  q.canonicalize();
  return q;
}

// ---------------------------------------------------------------------------
// Builders.  Coefficients arrive as polynomials of the target ring so the
// same code serves numeric and parameter-symbolic runs.
// ---------------------------------------------------------------------------
template <class K>
ProjMap<K> build_iota(RingPtr ring, const K& one) {
  // (x, y) -> (1 - x - (x-1)/y, -y - 1 - y/(x-1)) under [1 : x : y]
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X1 = MultiPoly<K>::variable(ring, 1, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  ProjMap<K> m;
  m.comp[0] = X0 * X2 * (X1 - X0);
  m.comp[1] = -((X1 - X0) * (X1 - X0) * (X0 + X2));
  m.comp[2] = -(X2 * ((X0 + X2) * (X1 - X0) + X0 * X2));
  normalize_map(m, {}, true);
  m.label = "iota";
  return m;
}

// F-hat = sum a_j x0^(n-j) x2^j, the degree-n homogenization of F(x2/x0).
template <class K>
MultiPoly<K> f_check(RingPtr ring, const std::vector<MultiPoly<K>>& a, const K& one) {
  int n = (int)a.size() - 1;
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  MultiPoly<K> acc = MultiPoly<K>::zero(ring);
  for (int j = 0; j <= n; ++j) acc = acc + a[j] * poly_pow(X0, n - j) * poly_pow(X2, j);
  return acc;
}

template <class K>
ProjMap<K> build_jf(RingPtr ring, const std::vector<MultiPoly<K>>& a, const K& one) {
  int n = (int)a.size() - 1;
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X1 = MultiPoly<K>::variable(ring, 1, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  ProjMap<K> m;
  if (n == 0) {
    m.comp[0] = X0;
    m.comp[1] = a[0] * X0 - X1;
    m.comp[2] = X2;
  } else {
    m.comp[0] = poly_pow(X0, n);
    m.comp[1] = f_check(ring, a, one) - X1 * poly_pow(X0, n - 1);
    m.comp[2] = X2 * poly_pow(X0, n - 1);
  }
  normalize_map(m, {}, true);
  m.label = "jF";
  return m;
}

template <class K>
ProjMap<K> build_k(RingPtr ring, const std::vector<MultiPoly<K>>& a, const K& one) {
  int n = (int)a.size() - 1;
  if (n < 1) throw std::invalid_argument("build_k: closed form needs n >= 1 (use the composition path)");
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X1 = MultiPoly<K>::variable(ring, 1, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  MultiPoly<K> A = X0 * X1 - X0 * X0;
  MultiPoly<K> B = X0 * X0 - X0 * X1 - X1 * X2;
  ProjMap<K> m;
  m.comp[0] = poly_pow(A, n) * X2;
  MultiPoly<K> s = MultiPoly<K>::zero(ring);
  for (int j = 0; j <= n; ++j) s = s + a[j] * poly_pow(A, n - j) * poly_pow(B, j);
  m.comp[1] = poly_pow(X0, n - 1) * poly_pow(X1 - X0, n + 1) * (X2 + X0) + X2 * s;
  m.comp[2] = X2 * poly_pow(A, n - 1) * B;
  normalize_map(m, {}, true);
  m.label = "k";
  return m;
}

template <class K>
ProjMap<K> build_k_inverse(RingPtr ring, const std::vector<MultiPoly<K>>& a, const K& one) {
  int n = (int)a.size() - 1;
  if (n < 1) throw std::invalid_argument("build_k_inverse: needs n >= 1");
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X1 = MultiPoly<K>::variable(ring, 1, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  MultiPoly<K> Fc = f_check(ring, a, one);
  MultiPoly<K> C2p = poly_pow(X0, n) + poly_pow(X0, n - 1) * X1 - Fc;
  MultiPoly<K> C4p = poly_pow(X0, n - 1) * (X0 * X0 + X0 * X1 + X1 * X2) - (X0 + X2) * Fc;
  ProjMap<K> m;
  m.comp[0] = -(poly_pow(X0, n) * X2 * C2p);
  m.comp[1] = -((X0 + X2) * C2p * C2p);
  m.comp[2] = poly_pow(X0, n - 1) * X2 * C4p;
  normalize_map(m, {}, true);
  m.label = "k^-1";
  return m;
}

// ---------------------------------------------------------------------------
// Exceptional-curve catalogue with rational parametrizations.
// ---------------------------------------------------------------------------
template <class K>
struct ParamCurve {
  std::string name;
  MultiPoly<K> defining;                // in the plane ring
  std::array<MultiPoly<K>, 3> param;    // in a (s, t) ring
};

template <class K>
struct CurveCatalog {
  RingPtr plane;
  RingPtr st;
  std::vector<ParamCurve<K>> curves;    // C1..C4 then C1'..C4'

  const ParamCurve<K>& by_name(const std::string& n) const {
    for (auto& c : curves)
      if (c.name == n) return c;
    throw std::invalid_argument("CurveCatalog: unknown curve " + n);
  }
  std::vector<MultiPoly<K>> forward_defining() const {
    return {curves[0].defining, curves[1].defining, curves[2].defining, curves[3].defining};
  }
  std::vector<MultiPoly<K>> inverse_defining() const {
    return {curves[4].defining, curves[5].defining, curves[6].defining, curves[7].defining};
  }
};

template <class K>
CurveCatalog<K> make_catalog(const FamilyParams& par, RingPtr plane, const K& one) {
  CurveCatalog<K> cat;
  cat.plane = plane;
  std::vector<std::string> stv = {"s", "t"};
  for (int i = 3; i < plane->size(); ++i) stv.push_back(plane->vars[i]);
  cat.st = make_ring(stv);
  auto X0 = MultiPoly<K>::variable(plane, 0, one);
  auto X1 = MultiPoly<K>::variable(plane, 1, one);
  auto X2 = MultiPoly<K>::variable(plane, 2, one);
  auto S = MultiPoly<K>::variable(cat.st, 0, one);
  auto T = MultiPoly<K>::variable(cat.st, 1, one);
  auto Z = MultiPoly<K>::zero(cat.st);
  int n = par.n;
  auto a = coeff_polys(par, plane, one);
  auto ast = coeff_polys(par, cat.st, one);
  MultiPoly<K> Fc = f_check(plane, a, one);
  // F-hat evaluated along [x0 : x2] = [s : t]
  MultiPoly<K> Fst = MultiPoly<K>::zero(cat.st);
  for (int j = 0; j <= n; ++j) Fst = Fst + ast[j] * poly_pow(S, n - j) * poly_pow(T, j);

  cat.curves.push_back({"C1", X0, {Z, S, T}});
  cat.curves.push_back({"C2", X0 - X1, {S, S, T}});
  cat.curves.push_back({"C3", X2, {S, T, Z}});
  cat.curves.push_back({"C4", -(X0 * X0) + X0 * X1 + X1 * X2,
                        {S * (S + T), S * S, T * (S + T)}});
  cat.curves.push_back({"C1p", X0, {Z, S, T}});
  MultiPoly<K> c2p = poly_pow(X0, n) + poly_pow(X0, n - 1) * X1 - Fc;
  cat.curves.push_back({"C2p", c2p,
                        {poly_pow(S, n), Fst - poly_pow(S, n), poly_pow(S, n - 1) * T}});
  cat.curves.push_back({"C3p", X2, {S, T, Z}});
  MultiPoly<K> c4p = poly_pow(X0, n - 1) * (X0 * X0 + X0 * X1 + X1 * X2) - (X0 + X2) * Fc;
  cat.curves.push_back({"C4p", c4p,
                        {poly_pow(S, n) * (S + T), (S + T) * Fst - poly_pow(S, n + 1),
                         poly_pow(S, n - 1) * T * (S + T)}});
  return cat;
}

// ---------------------------------------------------------------------------
// Jacobian factor report
// ---------------------------------------------------------------------------
template <class K>
struct JacobianReport {
  std::vector<std::string> names;
  std::vector<int> exponents;
  MultiPoly<K> remainder;
  bool constant_remainder() const { return remainder.total_degree() <= 0; }
};

template <class K>
JacobianReport<K> jacobian_factored(const ProjMap<K>& f, const std::vector<ParamCurve<K>>& curves) {
  std::array<std::array<MultiPoly<K>, 3>, 3> J;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) J[i][j] = derivative(f.comp[i], j);
  MultiPoly<K> det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                     J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                     J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  if (det.is_zero_poly()) throw std::domain_error("jacobian_factored: map not dominant");
  JacobianReport<K> rep;
  std::vector<MultiPoly<K>> defs;
  for (auto& c : curves) {
    rep.names.push_back(c.name);
    defs.push_back(c.defining);
  }
  auto td = trial_divide_copy(det, defs, rep.remainder);
  rep.exponents = td.exponents;
  return rep;
}

// ---------------------------------------------------------------------------
// Image of a parametrized curve: blown-down point or image curve degree.
// ---------------------------------------------------------------------------
template <class K>
struct CurveImage {
  bool is_point = false;
  ProjPoint<K> point{};        // valid when is_point
  int image_degree = -1;       // valid when !is_point
};

template <class K>
CurveImage<K> image_of_curve(const ProjMap<K>& f, const ParamCurve<K>& curve, const K& one) {
  RingPtr st = curve.param[0].ring;
  std::vector<MultiPoly<K>> images = {curve.param[0], curve.param[1], curve.param[2]};
  for (int i = 3; i < f.ring()->size(); ++i)
    images.push_back(MultiPoly<K>::variable(st, st->index(f.ring()->vars[i]), one));
  std::array<MultiPoly<K>, 3> g;
  for (int i = 0; i < 3; ++i) g[i] = substitute(f.comp[i], images);
  MultiPoly<K> gc = poly_gcd(poly_gcd(g[0], g[1]), g[2]);
  if (gc.total_degree() > 0)
    for (int i = 0; i < 3; ++i) {
      MultiPoly<K> q;
      if (!divide_exact(g[i], gc, q)) throw std::logic_error("image_of_curve: gcd division failed");
      g[i] = q;
    }
  // rank-1 test on the coefficient matrix: point iff every component is a
  // scalar multiple of one nonzero pivot component
  int pivot = -1;
  for (int i = 0; i < 3 && pivot < 0; ++i)
    if (!g[i].is_zero_poly()) pivot = i;
  if (pivot < 0) throw std::domain_error("image_of_curve: degenerate parametrization");
  CurveImage<K> out;
  K pc = g[pivot].leading().second;
  bool point = true;
  std::array<K, 3> coords{};
  for (int i = 0; i < 3; ++i) {
    if (g[i].is_zero_poly()) {
      coords[i] = K(pc - pc);
      continue;
    }
    // proportional iff g_i * pc - g_pivot * lead(g_i) == 0 with matching monomials
    K ci = K();
    bool found = false;
    for (auto& t : g[i].terms)
      if (t.first == g[pivot].leading().first) { ci = t.second; found = true; break; }
    if (!found && i != pivot) { point = false; break; }
    coords[i] = ci;
    MultiPoly<K> diff = scalar_mul(g[i], pc) - scalar_mul(g[pivot], ci);
    if (!diff.is_zero_poly()) { point = false; break; }
  }
  if (point) {
    out.is_point = true;
    out.point.x = coords;
    out.point.canonicalize();
  } else {
    out.image_degree = std::max({g[0].total_degree(), g[1].total_degree(), g[2].total_degree()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base points of a map along a parametrized curve: rational roots (height-
// bounded) of the parameter gcd of the pulled-back components.
// ---------------------------------------------------------------------------
struct BasePointReport {
  bool curve_in_base_locus = false;
  std::vector<std::pair<Rat, Rat>> roots;  // projective parameter values (s : t)
  int residual_degree = 0;                 // unresolved (non-rational) factor degree
};

inline BasePointReport base_points_on_curve(const ProjMap<Rat>& f, const ParamCurve<Rat>& curve,
                                            long height_bound = 10000) {
  RingPtr st = curve.param[0].ring;
  std::vector<MultiPoly<Rat>> images = {curve.param[0], curve.param[1], curve.param[2]};
  for (int i = 3; i < f.ring()->size(); ++i)
    images.push_back(MultiPoly<Rat>::variable(st, st->index(f.ring()->vars[i]), Rat(1)));
  std::array<MultiPoly<Rat>, 3> g;
  int raw_deg = 0;
  for (int i = 0; i < 3; ++i) {
    g[i] = substitute(f.comp[i], images);
    raw_deg = std::max(raw_deg, g[i].total_degree());
  }
  BasePointReport rep;
  if (g[0].is_zero_poly() && g[1].is_zero_poly() && g[2].is_zero_poly()) {
    rep.curve_in_base_locus = true;
    return rep;
  }
  (void)raw_deg;
  MultiPoly<Rat> gc = poly_gcd(poly_gcd(g[0], g[1]), g[2]);
  if (gc.total_degree() <= 0) return rep;
  // split off the parameter-axis roots
  int ordS = lowest_order(gc, 0), ordT = lowest_order(gc, 1);
  for (int i = 0; i < ordS; ++i) rep.roots.emplace_back(Rat(0), Rat(1));
  for (int i = 0; i < ordT; ++i) rep.roots.emplace_back(Rat(1), Rat(0));
  MultiPoly<Rat> core = gc;
  {
    auto S = MultiPoly<Rat>::variable(st, 0, Rat(1));
    auto T = MultiPoly<Rat>::variable(st, 1, Rat(1));
    MultiPoly<Rat> q;
    for (int i = 0; i < ordS; ++i) { divide_exact(core, S, q); core = q; }
    for (int i = 0; i < ordT; ++i) { divide_exact(core, T, q); core = q; }
  }
  core = normalize_scalar(core);
  // rational-root search on the remaining (s,t)-homogeneous factor: a root
  // (p : q) corresponds to the linear factor q*s - p*t
  int d = degree_in(core, 0);
  if (d <= 0 && degree_in(core, 1) <= 0) return rep;
  MultiPoly<Rat> lead = coeff_of(core, 0, degree_in(core, 0));
  MultiPoly<Rat> trail = coeff_of(core, 0, lowest_order(core, 0));
  auto int_divisors = [&](const MultiPoly<Rat>& c) {
    std::vector<BigInt> divs;
    if (c.terms.empty()) return divs;
    BigInt v = boost::multiprecision::numerator(c.leading().second);
    if (v < 0) v = -v;
    for (BigInt q = 1; q <= v && q <= height_bound; ++q)
      if (v % q == 0) divs.push_back(q);
    return divs;
  };
  auto S = MultiPoly<Rat>::variable(st, 0, Rat(1));
  auto T = MultiPoly<Rat>::variable(st, 1, Rat(1));
  for (const BigInt& pnum : int_divisors(trail))
    for (const BigInt& qden : int_divisors(lead))
      for (int sign = 0; sign < 2; ++sign) {
        Rat pv = sign ? Rat(-pnum) : Rat(pnum);
        MultiPoly<Rat> lin = scalar_mul(S, Rat(qden)) - scalar_mul(T, pv);
        MultiPoly<Rat> q;
        while (divide_exact(core, lin, q)) {
          core = q;
          rep.roots.emplace_back(pv / Rat(qden), Rat(1));
        }
      }
  rep.residual_degree = std::max(core.total_degree(), 0);
  return rep;
}

// ---------------------------------------------------------------------------
// Rational invariant check: phi1/phi2 is preserved exactly.
// ---------------------------------------------------------------------------
template <class K>
bool check_invariant(const ProjMap<K>& f, const MultiPoly<K>& phi1, const MultiPoly<K>& phi2) {
  if (!phi1.is_homogeneous() || !phi2.is_homogeneous() ||
      phi1.total_degree() != phi2.total_degree())
    throw std::invalid_argument("check_invariant: inputs must be homogeneous of equal degree");
  std::vector<MultiPoly<K>> images = {f.comp[0], f.comp[1], f.comp[2]};
  for (int i = 3; i < f.ring()->size(); ++i)
    images.push_back(MultiPoly<K>::variable(f.ring(), i, phi1.terms.empty()
                                                             ? phi2.leading().second / phi2.leading().second
                                                             : phi1.leading().second / phi1.leading().second));
  MultiPoly<K> a = substitute(phi1, images) * phi2;
  MultiPoly<K> b = substitute(phi2, images) * phi1;
  return poly_equal(a, b);
}

// The conserved quantity of the cubic subfamily F = a z^3 + a z^2 + b z + 2:
// phi = phi1/phi2 with phi1 = x0^2 x2^2.
template <class K>
std::pair<MultiPoly<K>, MultiPoly<K>> cubic_invariant(RingPtr ring, const K& one, const K& a,
                                                      const K& b) {
  auto X0 = MultiPoly<K>::variable(ring, 0, one);
  auto X1 = MultiPoly<K>::variable(ring, 1, one);
  auto X2 = MultiPoly<K>::variable(ring, 2, one);
  auto C = [&](const K& c) { return MultiPoly<K>::constant(ring, c); };
  MultiPoly<K> phi1 = X0 * X0 * X2 * X2;
  MultiPoly<K> phi2 = X0 * X0 * (X0 - X1) * (X0 - X1) + C(b) * X0 * X0 * X2 * (X0 - X1) -
                      C(a) * X1 * X2 * X2 * (X0 + X2);
  return {phi1, phi2};
}

// ---------------------------------------------------------------------------
// Degree sequence by symbolic iteration
// ---------------------------------------------------------------------------
struct DegreeSequenceResult {
  std::vector<long> degrees;
  bool budget_exceeded = false;
  std::size_t budget = 0;
  std::uint64_t prime = 0;  // 0 for rational runs
  std::vector<std::string> warnings;
};

// Iterates k^m = k ∘ k^(m-1); the common factor of the un-normalized
// composition is supported on the contracted curves, so catalogue trial
// division is the complete normalization here.
template <class K>
DegreeSequenceResult degree_sequence_impl(const ProjMap<K>& k,
                                          const std::vector<MultiPoly<K>>& candidates, int m_max,
                                          std::size_t term_budget, bool full_gcd = false) {
  DegreeSequenceResult res;
  res.budget = term_budget;
  ProjMap<K> cur = k;
  res.degrees.push_back(cur.degree());
  for (int m = 2; m <= m_max; ++m) {
    if (cur.term_count() > term_budget) {
      res.budget_exceeded = true;
      break;
    }
    cur = compose(k, cur, candidates, full_gcd);
    res.degrees.push_back(cur.degree());
  }
  return res;
}

enum class ArithmeticMode { Rational, PrimeField };

// Degree of the common factor of the three components, measured by
// restricting them to random lines over a large prime field: the gcd of the
// three univariate restrictions has the factor's degree for a generic line.
// Per prime we take the minimum over several lines (an unlucky line can only
// overshoot); across primes we take the maximum (a prime dividing a leading
// coefficient can only undershoot).
inline int common_factor_degree_probe(const ProjMap<Rat>& m, std::uint64_t seed = 12345) {
  RingPtr rs = make_ring({"s"});
  MultiPoly<Fp> s_dummy(rs);
  int best = 0;
  std::mt19937_64 rng(seed);
  for (std::uint64_t p : {2147483629ULL, 2147483587ULL}) {
    Fp one(1, p);
    int per_prime = -1;
    for (int line = 0; line < 3; ++line) {
      try {
        std::vector<MultiPoly<Fp>> images;
        for (int i = 0; i < 3; ++i) {
          MultiPoly<Fp> li = MultiPoly<Fp>::constant(rs, Fp(rng() % p, p)) +
                             scalar_mul(MultiPoly<Fp>::variable(rs, 0, one), Fp(rng() % p, p));
          images.push_back(li);
        }
        int g = -1;
        bool degenerate = false;
        MultiPoly<Fp> acc(rs);
        for (int i = 0; i < 3; ++i) {
          MultiPoly<Fp> c = map_coeffs(m.comp[i], m.ring(), one);
          MultiPoly<Fp> r = substitute(c, images);
          if (r.total_degree() != m.comp[i].total_degree()) {
            degenerate = true;  // line through a zero of the top form
            break;
          }
          acc = i == 0 ? r : poly_gcd(acc, r);
        }
        if (degenerate) continue;
        g = acc.total_degree();
        if (per_prime < 0 || g < per_prime) per_prime = g;
      } catch (const std::domain_error&) {
        per_prime = -1;  // denominator hit this prime; trust the other one
        break;
      }
    }
    if (per_prime > best) best = per_prime;
  }
  return best;
}

// Exact rational degree sequence (intended for shallow spot checks; the
// prime-field path in dense.hpp handles deep runs).  Catalogue factors are
// divided out exactly; the remaining common factor is not removed from the
// iterate (a full trivariate gcd over Q is far too slow) but its degree is
// measured by a modular line probe and subtracted, so the reported degrees
// are those of the reduced iterates.
inline DegreeSequenceResult degree_sequence_rational(const FamilyParams& par, int m_max,
                                                     std::size_t term_budget = 2000000) {
  par.validate();
  RingPtr ring = plane_ring();
  auto a = coeff_polys(par, ring, Rat(1));
  ProjMap<Rat> k;
  std::vector<MultiPoly<Rat>> candidates;
  if (par.n == 0) {
    k = compose(build_jf(ring, a, Rat(1)), build_iota(ring, Rat(1)), {}, true);
  } else {
    k = build_k(ring, a, Rat(1));
    candidates = make_catalog(par, ring, Rat(1)).forward_defining();
  }
  DegreeSequenceResult res;
  res.budget = term_budget;
  ProjMap<Rat> cur = k;
  res.degrees.push_back(cur.degree());
  for (int m = 2; m <= m_max; ++m) {
    if (cur.term_count() > term_budget) {
      res.budget_exceeded = true;
      break;
    }
    cur = compose(k, cur, candidates, false);
    int junk = common_factor_degree_probe(cur, 1000 * (unsigned)m + 7);
    res.degrees.push_back(cur.degree() - junk);
    if (junk)
      res.warnings.push_back("m = " + std::to_string(m) + ": common factor of degree " +
                             std::to_string(junk) + " detected by modular probe");
  }
  return res;
}

}  // namespace kmap
