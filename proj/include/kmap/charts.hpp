#pragma once
// Blowup chart atlases for the towers that regularize the family: local
// (u, eta) parametrizations of the exceptional fibers, orders of vanishing,
// induced fiber maps computed as exact u -> 0 limits, exceptional-orbit
// confinement scans, and parameter genericity reports.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmap/gcd.hpp"
#include "kmap/poly.hpp"
#include "kmap/projmap.hpp"

namespace kmap {

// Ring holding both the plane coordinates and one chart's local coordinates,
// optionally with the family coefficients as symbols.
inline RingPtr tower_ring(int n, bool symbolic) {
  std::vector<std::string> vars = {"x0", "x1", "x2", "u", "eta"};
  if (symbolic)
    for (int j = 0; j <= n; ++j) vars.push_back("a" + std::to_string(j));
  return make_ring(std::move(vars));
}

using RPoly = MultiPoly<Rat>;

// A rational expression as a reduced numerator/denominator pair.
struct RatPair {
  RPoly num, den;
};

inline RatPair reduce_pair(RPoly num, RPoly den) {
  if (den.is_zero_poly()) throw std::invalid_argument("reduce_pair: zero denominator");
  if (num.is_zero_poly()) return {std::move(num), RPoly::constant(den.ring, Rat(1))};
  RPoly g = poly_gcd(num, den);
  RPoly qn, qd;
  if (divide_exact(num, g, qn) && divide_exact(den, g, qd)) {
    num = std::move(qn);
    den = std::move(qd);
  }
  return {std::move(num), std::move(den)};
}

// ---------------------------------------------------------------------------
// Charts.  A chart names a fiber (or a plane curve treated uniformly): the
// locus {u = 0}, with eta the coordinate along it.  The forward map sends
// (u, eta) into homogeneous coordinates; the inverse coordinate formulas are
// homogeneous numerator/denominator pairs in (x0, x1, x2).
// ---------------------------------------------------------------------------
struct Chart {
  std::string name;
  bool is_fiber = true;  // false for the plane-curve charts C1..C4
  std::array<RPoly, 3> fwd;
  RatPair inv_u, inv_eta;
};

// ---------------------------------------------------------------------------
// u-adic order and leading slice
// ---------------------------------------------------------------------------
inline int ord_u(const RPoly& p, int uvar) {
  if (p.is_zero_poly()) return -1;
  int o = -1;
  for (auto& t : p.terms) {
    int e = t.first.e[uvar];
    if (o < 0 || e < o) o = e;
  }
  return o;
}

// terms of u-order exactly ord, with the u factor removed
inline RPoly u_slice(const RPoly& p, int uvar, int ord) {
  RPoly out = RPoly::zero(p.ring);
  for (auto& t : p.terms)
    if (t.first.e[uvar] == ord) {
      Monomial m = t.first;
      m.e[uvar] = 0;
      out.terms.emplace_back(m, t.second);
    }
  out.normalize_order();
  return out;
}

// ---------------------------------------------------------------------------
// Moebius maps between fibers (or from a fiber into the plane):
//  - to_fiber: eta |-> num(eta)/den(eta) in the destination fiber coordinate;
//  - otherwise: the u -> 0 limit parametrization eta |-> [p0:p1:p2].
// ---------------------------------------------------------------------------
struct MoebiusMap {
  std::string src, dst;
  bool to_fiber = true;
  bool defined = true;     // false: wrong destination guessed
  bool infinite = false;   // eta-limit escapes the affine fiber coordinate
  std::string note;        // leading u-orders when !defined
  RPoly num, den;          // when to_fiber && defined && !infinite
  std::array<RPoly, 3> plane{};  // when !to_fiber

  bool is_constant(int etavar) const {
    return defined && !infinite && degree_in(num, etavar) <= 0 && degree_in(den, etavar) <= 0;
  }
};

// ---------------------------------------------------------------------------
// Atlas
// ---------------------------------------------------------------------------
struct BlowupCenter {
  std::string fiber;     // name of the new fiber
  std::string base;      // "plane" or the fiber the center lies on
  std::string location;  // printable coordinates of the center
};

struct ChartAtlas {
  char family = 'X';  // 'X' (n even), 'Y' (n odd), 'Z' (cubic subfamily)
  FamilyParams par;
  bool symbolic = false;
  RingPtr ring;
  std::vector<RPoly> acoef;  // a_0..a_n as ring constants or symbols
  std::vector<Chart> charts;   // exceptional fibers, in blowup order
  std::vector<Chart> curves;   // plane-curve charts C1..C4
  std::vector<BlowupCenter> centers;

  const Chart* find(const std::string& name) const {
    for (auto& c : charts)
      if (c.name == name) return &c;
    for (auto& c : curves)
      if (c.name == name) return &c;
    return nullptr;
  }
  const Chart& at(const std::string& name) const {
    const Chart* c = find(name);
    if (!c) throw std::invalid_argument("ChartAtlas: no chart named " + name);
    return *c;
  }
};

namespace detail_charts {

// [T : 1 : Y] with T, Y polynomials in (u, eta)
inline std::array<RPoly, 3> mk(RPoly T, RPoly Y, RingPtr ring) {
  return {std::move(T), RPoly::constant(ring, Rat(1)), std::move(Y)};
}

// Re-center a chart at the fiber point eta = cn/cd: the new chart has
// forward (u, eta) -> old-forward(u, cn/cd + u*eta) (denominators cleared
// projectively) and inverse (u, (eta_old - cn/cd)/u).
inline Chart recenter(const Chart& ch, const std::string& name, const RPoly& cn, const RPoly& cd,
                      int uvar, int evar) {
  RingPtr ring = ch.fwd[0].ring;
  RPoly u = RPoly::variable(ring, uvar, Rat(1));
  RPoly eta = RPoly::variable(ring, evar, Rat(1));
  RPoly s = cn + cd * u * eta;  // cd * (c + u*eta)
  int dmax = 0;
  for (auto& f : ch.fwd) dmax = std::max(dmax, degree_in(f, evar));
  std::vector<RPoly> cdpow(dmax + 1), spow(dmax + 1);
  cdpow[0] = RPoly::constant(ring, Rat(1));
  spow[0] = cdpow[0];
  for (int j = 1; j <= dmax; ++j) {
    cdpow[j] = cdpow[j - 1] * cd;
    spow[j] = spow[j - 1] * s;
  }
  Chart out;
  out.name = name;
  for (int i = 0; i < 3; ++i) {
    RPoly acc = RPoly::zero(ring);
    for (int j = 0; j <= degree_in(ch.fwd[i], evar); ++j)
      acc = acc + coeff_of(ch.fwd[i], evar, j) * spow[j] * cdpow[dmax - j];
    out.fwd[i] = std::move(acc);
  }
  out.inv_u = ch.inv_u;
  out.inv_eta = reduce_pair((ch.inv_eta.num * cd - cn * ch.inv_eta.den) * ch.inv_u.den,
                            cd * ch.inv_eta.den * ch.inv_u.num);
  return out;
}

}  // namespace detail_charts

// forward followed by inverse must reproduce (u, eta) exactly
inline bool chart_round_trip(const Chart& ch, int uvar, int evar) {
  RingPtr ring = ch.fwd[0].ring;
  std::vector<RPoly> img;
  for (std::size_t i = 0; i < ring->vars.size(); ++i) img.push_back(RPoly::variable(ring, (int)i, Rat(1)));
  for (int i = 0; i < 3; ++i) img[i] = ch.fwd[i];
  RPoly u = RPoly::variable(ring, uvar, Rat(1));
  RPoly eta = RPoly::variable(ring, evar, Rat(1));
  RPoly un = substitute(ch.inv_u.num, img), ud = substitute(ch.inv_u.den, img);
  RPoly en = substitute(ch.inv_eta.num, img), ed = substitute(ch.inv_eta.den, img);
  return poly_equal(un, u * ud) && poly_equal(en, eta * ed);
}

// ---------------------------------------------------------------------------
// Tower construction
// ---------------------------------------------------------------------------
inline ChartAtlas build_tower(const FamilyParams& par, char family, bool symbolic = false) {
  using detail_charts::mk;
  using detail_charts::recenter;
  par.validate();
  int n = par.n;
  if (family == 'X' && (n < 2 || n % 2 != 0))
    throw std::invalid_argument("build_tower: family X requires n even >= 2");
  if (family == 'Y' && (n < 1 || n % 2 != 1))
    throw std::invalid_argument("build_tower: family Y requires n odd >= 1");
  if (family == 'Z' && !par.is_cubic_family())
    throw std::invalid_argument("build_tower: family Z requires F = a z^3 + a z^2 + b z + 2");
  ChartAtlas atlas;
  atlas.family = family;
  atlas.par = par;
  atlas.symbolic = symbolic;
  atlas.ring = tower_ring(n, symbolic);
  RingPtr R = atlas.ring;
  atlas.acoef = coeff_polys(par, R, Rat(1));
  if (family == 'Z' && symbolic) {
    // the cubic subfamily keeps only two free symbols: a_0 = 2 and a_2 = a_3
    atlas.acoef[0] = RPoly::constant(R, Rat(2));
    atlas.acoef[2] = atlas.acoef[3];
  }
  const int uvar = R->index("u"), evar = R->index("eta");
  RPoly u = RPoly::variable(R, uvar, Rat(1));
  RPoly eta = RPoly::variable(R, evar, Rat(1));
  RPoly one = RPoly::constant(R, Rat(1));
  auto var = [&](int i) { return RPoly::variable(R, i, Rat(1)); };
  RPoly x0 = var(0), x1 = var(1), x2 = var(2);

  // E1: blow up e1 = [0:1:0]; affine (t, y) = (x0/x1, x2/x1), chart
  // (t, y) = (u*eta, u) so the fiber coordinate is xi = t/y.
  Chart E1;
  E1.name = "E1";
  E1.fwd = mk(u * eta, u, R);
  E1.inv_u = {x2, x1};
  E1.inv_eta = {x0, x2};
  atlas.centers.push_back({"E1", "plane", "[0:1:0]"});

  // Q: blow up q = E1 /\ {strict transform of C4}, the direction y/t = -1:
  // (t, y) = (u, u*(-1 + u*eta)), with inverse (y/t + 1, (y + t)/t^2).  The
  // fiber coordinate (y + t)/t^2 realizes the xi1 of the Q <-> C3 formulas.
  Chart Q;
  Q.name = "Q";
  Q.fwd = mk(u, u * (u * eta - one), R);
  Q.inv_u = {x0, x1};
  Q.inv_eta = {(x2 + x0) * x1, x0 * x0};
  atlas.centers.push_back({"Q", "E1", "eta = -1 (the C4 direction)"});

  // P_j, 1 <= j <= n-1: iterated blowups p_j = E1 /\ P_{j-1} starting from
  // p_1 = E1 /\ C1; chart (t, y) = (u^{j+1} eta, u^j eta), inverse
  // (t/y, y^{j+1}/t^j).
  std::vector<Chart> Pj(std::max(0, n + 1));
  auto upow = [&](int j) {
    RPoly r = one;
    for (int i = 0; i < j; ++i) r = r * u;
    return r;
  };
  for (int j = 1; j <= n - 1; ++j) {
    Chart c;
    c.name = "P" + std::to_string(j);
    c.fwd = mk(upow(j + 1) * eta, upow(j) * eta, R);
    // u = t/y, eta = y^{j+1}/t^j, homogenized over x1
    RPoly ynum = one, yden = one;
    for (int i = 0; i <= j; ++i) ynum = ynum * x2;
    for (int i = 0; i < j; ++i) yden = yden * x0;
    c.inv_u = reduce_pair(x0, x2);
    c.inv_eta = reduce_pair(ynum, yden * x1);
    Pj[j] = std::move(c);
    atlas.centers.push_back({Pj[j].name, j == 1 ? "E1" : "P" + std::to_string(j - 1),
                             j == 1 ? "E1 /\\ C1" : "E1 /\\ P" + std::to_string(j - 1)});
  }

  // P_n (odd n): blow up p_n = (0, 1/a_n) in the P_{n-1} coordinates; chart
  // (t, y) = (u^n (u eta + 1/a_n), u^{n-1} (u eta + 1/a_n)) scaled by a_n.
  Chart Pn;
  if (family == 'Y' || family == 'Z') {
    const RPoly& an = atlas.acoef[n];
    RPoly core = an * u * eta + one;
    Pn.name = "P" + std::to_string(n);
    Pn.fwd = {upow(n) * core, an, upow(n - 1) * core};
    // u = t/y; eta = (y^n/t^{n-1} - 1/a_n) * y/t
    RPoly ynum = one, x0pow = one;
    for (int i = 0; i < n; ++i) ynum = ynum * x2;
    for (int i = 0; i < n - 1; ++i) x0pow = x0pow * x0;
    Pn.inv_u = reduce_pair(x0, x2);
    Pn.inv_eta = reduce_pair(x2 * (an * ynum - x1 * x0pow), an * x1 * x0pow * x0);
    atlas.centers.push_back({Pn.name, "P" + std::to_string(n - 1),
                             "eta = 1/a_" + std::to_string(n)});
  }

  // E2 (used by Z and by the n = 1 tower): blow up e2 = [0:0:1];
  // (u, eta) -> [u : u*eta : 1].
  Chart E2;
  E2.name = "E2";
  E2.fwd = {u, u * eta, one};
  E2.inv_u = {x0, x2};
  E2.inv_eta = {x1, x0};

  atlas.charts.push_back(E1);
  atlas.charts.push_back(Q);
  for (int j = 1; j <= n - 1; ++j) atlas.charts.push_back(Pj[j]);
  if (family == 'Y' || family == 'Z') atlas.charts.push_back(Pn);
  if (family == 'Y' && n == 1) {
    atlas.charts.push_back(E2);
    atlas.centers.push_back({"E2", "plane", "[0:0:1]"});
  }

  if (family == 'Z') {
    const RPoly& a = atlas.acoef[3];
    const RPoly& b = atlas.acoef[1];
    RPoly two = RPoly::constant(R, Rat(2));
    // e2 and e01 first
    atlas.charts.push_back(E2);
    atlas.centers.push_back({"E2", "plane", "[0:0:1]"});
    Chart E01;
    E01.name = "E01";
    // blow up e01 = [1:1:0]: affine (t - 1, y), chart (t - 1, y) = (u*eta, u)
    E01.fwd = mk(one + u * eta, u, R);
    E01.inv_u = {x2, x1};
    E01.inv_eta = {x0 - x1, x2};
    atlas.charts.push_back(E01);
    atlas.centers.push_back({"E01", "plane", "[1:1:0]"});
    // p4 = -1/a on P3, p5 on P4, p6 on P5, r = 0 on E2 /\ {x1 = 0}
    RPoly asq = a * a;
    Chart P4 = recenter(Pn, "P4", RPoly::zero(R) - one, a, uvar, evar);
    atlas.charts.push_back(P4);
    atlas.centers.push_back({"P4", "P3", "eta = -1/a"});
    Chart P5 = recenter(P4, "P5", a - b, asq, uvar, evar);
    atlas.charts.push_back(P5);
    atlas.centers.push_back({"P5", "P4", "eta = (a-b)/a^2"});
    Chart P6 = recenter(P5, "P6", two * b - two - a, asq, uvar, evar);
    atlas.charts.push_back(P6);
    atlas.centers.push_back({"P6", "P5", "eta = (2b-2-a)/a^2"});
    Chart Rc = recenter(E2, "R", RPoly::zero(R), one, uvar, evar);
    atlas.charts.push_back(Rc);
    atlas.centers.push_back({"R", "E2", "eta = 0 (the x1 = 0 direction)"});
  }

  // plane-curve charts, for fiber maps with curve sources/destinations
  {
    Chart C1{"C1", false, mk(u, eta, R), {x0, x1}, {x2, x1}};
    Chart C2{"C2", false, mk(one + u, eta, R), {x0 - x1, x1}, {x2, x1}};
    Chart C3{"C3", false, mk(eta, u, R), {x2, x1}, {x0, x1}};
    Chart C4{"C4", false, mk(eta, eta * eta - eta + u, R),
             {x2 * x1 - x0 * x0 + x0 * x1, x1 * x1},
             {x0, x1}};
    atlas.curves = {C1, C2, C3, C4};
  }
  return atlas;
}

// the family's map, built directly in the atlas ring
inline ProjMap<Rat> atlas_map(const ChartAtlas& atlas) {
  if (atlas.par.n >= 1) return build_k(atlas.ring, atlas.acoef, Rat(1));
  return compose(build_jf(atlas.ring, atlas.acoef, Rat(1)), build_iota(atlas.ring, Rat(1)), {},
                 true);
}

// substitute only x0, x1, x2 (other variables pass through); h may live in a
// different ring with the same trailing parameter variables
inline RPoly substitute_plane(const RPoly& h, const std::array<RPoly, 3>& img, RingPtr target) {
  std::vector<RPoly> full;
  for (std::size_t i = 0; i < h.ring->vars.size(); ++i) {
    const std::string& v = h.ring->vars[i];
    if (v == "x0") full.push_back(img[0]);
    else if (v == "x1") full.push_back(img[1]);
    else if (v == "x2") full.push_back(img[2]);
    else {
      int idx = target->index(v);
      if (idx < 0) throw std::invalid_argument("substitute_plane: variable " + v + " not in target ring");
      full.push_back(RPoly::variable(target, idx, Rat(1)));
    }
  }
  return substitute(h, full);
}

// ---------------------------------------------------------------------------
// Order of vanishing: the u-adic order of h composed with (optionally) the
// map and the chart's forward parametrization.
// ---------------------------------------------------------------------------
inline int order_of_vanishing(const RPoly& h, const Chart& chart, const ProjMap<Rat>* map) {
  RingPtr R = chart.fwd[0].ring;
  int uvar = R->index("u");
  std::vector<RPoly> img;
  for (std::size_t i = 0; i < R->vars.size(); ++i) img.push_back(RPoly::variable(R, (int)i, Rat(1)));
  if (map) {
    for (int i = 0; i < 3; ++i) img[i] = substitute_plane(map->comp[i], chart.fwd, R);
  } else {
    for (int i = 0; i < 3; ++i) img[i] = chart.fwd[i];
  }
  RPoly pulled = substitute(h, img);
  int o = ord_u(pulled, uvar);
  if (o < 0)
    throw std::domain_error("order_of_vanishing: pullback of " + poly_print(h) +
                            " vanishes identically on chart " + chart.name);
  return o;
}

// ---------------------------------------------------------------------------
// Induced fiber maps: the exact u -> 0 limit of dst^{-1} o map o src.
// ---------------------------------------------------------------------------
inline MoebiusMap induced_fiber_map(const ProjMap<Rat>& map, const Chart& src, const Chart& dst) {
  RingPtr R = src.fwd[0].ring;
  int uvar = R->index("u"), evar = R->index("eta");
  std::array<RPoly, 3> X;
  for (int i = 0; i < 3; ++i) X[i] = substitute_plane(map.comp[i], src.fwd, R);
  MoebiusMap out;
  out.src = src.name;
  out.dst = dst.name;
  RPoly un = substitute_plane(dst.inv_u.num, X, R), ud = substitute_plane(dst.inv_u.den, X, R);
  RPoly en = substitute_plane(dst.inv_eta.num, X, R), ed = substitute_plane(dst.inv_eta.den, X, R);
  int oun = ord_u(un, uvar), oud = ord_u(ud, uvar);
  int oen = ord_u(en, uvar), oed = ord_u(ed, uvar);
  if (oud < 0 || oed < 0 || !(oun < 0 || oun > oud)) {
    out.defined = false;
    out.note = "transversal coordinate does not tend to 0 (u-orders " + std::to_string(oun) +
               "/" + std::to_string(oud) + ")";
    return out;
  }
  if (oen < 0 || oen > oed) {  // eta -> 0
    out.num = RPoly::zero(R);
    out.den = RPoly::constant(R, Rat(1));
    return out;
  }
  if (oen < oed) {
    out.infinite = true;
    out.note = "fiber coordinate tends to infinity";
    return out;
  }
  RPoly num = u_slice(en, uvar, oen), den = u_slice(ed, uvar, oed);
  RatPair rp = reduce_pair(std::move(num), std::move(den));
  out.num = std::move(rp.num);
  out.den = std::move(rp.den);
  return out;
}

// the u -> 0 limit of map o src as a plane parametrization in eta
inline MoebiusMap induced_plane_image(const ProjMap<Rat>& map, const Chart& src) {
  RingPtr R = src.fwd[0].ring;
  int uvar = R->index("u");
  std::array<RPoly, 3> X;
  for (int i = 0; i < 3; ++i) X[i] = substitute_plane(map.comp[i], src.fwd, R);
  int o = -1;
  for (int i = 0; i < 3; ++i) {
    int oi = ord_u(X[i], uvar);
    if (oi >= 0 && (o < 0 || oi < o)) o = oi;
  }
  MoebiusMap out;
  out.src = src.name;
  out.dst = "plane";
  out.to_fiber = false;
  if (o < 0) {
    out.defined = false;
    out.note = "all components vanish identically";
    return out;
  }
  for (int i = 0; i < 3; ++i) out.plane[i] = u_slice(X[i], uvar, o);
  // remove any common eta-dependent factor
  RPoly g = poly_gcd(poly_gcd(out.plane[0], out.plane[1]), out.plane[2]);
  if (g.total_degree() > 0) {
    for (int i = 0; i < 3; ++i) {
      RPoly q;
      if (divide_exact(out.plane[i], g, q)) out.plane[i] = std::move(q);
    }
  }
  return out;
}

// evaluate a fiber Moebius map at an exact rational fiber coordinate
inline std::optional<Rat> moebius_value(const MoebiusMap& m, const Rat& v) {
  if (!m.defined || m.infinite || !m.to_fiber) return std::nullopt;
  RingPtr R = m.num.ring;
  int evar = R->index("eta");
  std::vector<Rat> pt(R->vars.size(), Rat(0));
  pt[evar] = v;
  Rat num = poly_eval(m.num, pt, Rat(1));
  Rat den = poly_eval(m.den, pt, Rat(1));
  if (den == 0) return std::nullopt;
  return num / den;
}

// evaluate a fiber Moebius map at a projective fiber point [p : q]; the
// result is normalized to (value, 1), or (1, 0) for the point at infinity
inline std::optional<std::pair<Rat, Rat>> moebius_value_proj(const MoebiusMap& m,
                                                             const std::pair<Rat, Rat>& v) {
  if (!m.defined || !m.to_fiber) return std::nullopt;
  if (m.infinite) return std::make_pair(Rat(1), Rat(0));
  RingPtr R = m.num.ring;
  int evar = R->index("eta");
  int d = std::max(degree_in(m.num, evar), degree_in(m.den, evar));
  if (d < 0) return std::nullopt;
  std::vector<Rat> pt(R->vars.size(), Rat(0));
  auto homog = [&](const RPoly& f) {
    Rat acc(0);
    for (int k = 0; k <= d; ++k) {
      RPoly c = coeff_of(f, evar, k);
      if (c.is_zero_poly()) continue;
      Rat term = poly_eval(c, pt, Rat(1));
      for (int i = 0; i < k; ++i) term *= v.first;
      for (int i = k; i < d; ++i) term *= v.second;
      acc += term;
    }
    return acc;
  };
  Rat N = homog(m.num), D = homog(m.den);
  if (N == 0 && D == 0) return std::nullopt;
  if (D == 0) return std::make_pair(Rat(1), Rat(0));
  return std::make_pair(N / D, Rat(1));
}

// ---------------------------------------------------------------------------
// Genericity report
// ---------------------------------------------------------------------------
struct GenericityReport {
  bool leading_zero = false;       // a_n = 0
  bool a0_two_over_m = false;      // a_0 = 2/m for some 1 <= m <= horizon
  int a0_m = 0;
  bool odd_resonance = false;      // n odd: 2 a_{n-1} = (n-1) a_n
  int horizon = 0;
  bool generic() const { return !leading_zero && !a0_two_over_m && !odd_resonance; }
};

inline GenericityReport genericity_report(const FamilyParams& par, int horizon = 64) {
  par.validate();
  GenericityReport rep;
  rep.horizon = horizon;
  rep.leading_zero = par.n >= 1 && par.coeffs[par.n] == 0;
  for (int m = 1; m <= horizon; ++m)
    if (par.coeffs[0] * m == 2) {
      rep.a0_two_over_m = true;
      rep.a0_m = m;
      break;
    }
  if (par.n >= 1 && par.n % 2 == 1)
    rep.odd_resonance = 2 * par.coeffs[par.n - 1] == Rat(par.n - 1) * par.coeffs[par.n];
  return rep;
}

// ---------------------------------------------------------------------------
// Exceptional-orbit report: forward orbits of the exceptional curves through
// the induced fiber maps, with collision flags against the indeterminacy
// points (e01 on C3, and the fiber indeterminacy point on P_{n-1} or P_n).
// ---------------------------------------------------------------------------
struct OrbitReport {
  struct Orbit {
    std::string curve;                // the exceptional curve whose orbit this is
    std::string fiber;                // where the orbit lives ("C3" or "P...")
    // successive fiber coordinates as projective pairs, (value, 1) for finite
    // points and (1, 0) for the point of the fiber outside the chart
    std::vector<std::pair<Rat, Rat>> points;
    std::vector<int> steps;           // plane-map step index of each point
    bool collision = false;
    int collision_step = -1;
    std::string collision_with;
    bool truncated = false;
  };
  std::vector<Orbit> orbits;
  bool any_collision = false;
};

inline OrbitReport exceptional_orbit_report(const FamilyParams& par, int horizon = 64) {
  par.validate();
  if (horizon < 1) throw std::invalid_argument("exceptional_orbit_report: horizon < 1");
  int n = par.n;
  if (n < 1) return {};  // n = 0: no exceptional fibers in scope
  char family = n % 2 == 0 ? 'X' : 'Y';
  ChartAtlas atlas = build_tower(par, family, false);
  ProjMap<Rat> k = atlas_map(atlas);
  OrbitReport rep;

  // C4 orbit along C3 via the C3 <-> Q two-cycle; indeterminate at e01
  {
    OrbitReport::Orbit orb;
    orb.curve = "C4";
    orb.fiber = "C3";
    MoebiusMap c3q = induced_fiber_map(k, atlas.at("C3"), atlas.at("Q"));
    MoebiusMap qc3 = induced_fiber_map(k, atlas.at("Q"), atlas.at("C3"));
    // the image of C4 is one point of C3; read it off the plane image so the
    // orbit also starts when that point lies outside the fiber chart, and
    // track the orbit projectively for the same reason
    std::optional<std::pair<Rat, Rat>> v;
    {
      MoebiusMap c4pl = induced_plane_image(k, atlas.at("C4"));
      if (c4pl.defined && !c4pl.to_fiber && c4pl.plane[2].is_zero_poly()) {
        std::vector<Rat> pt(atlas.ring->vars.size(), Rat(0));
        Rat p0 = poly_eval(c4pl.plane[0], pt, Rat(1));
        Rat p1 = poly_eval(c4pl.plane[1], pt, Rat(1));
        if (p0 != 0 || p1 != 0) v = std::make_pair(p0, p1);
      }
    }
    int step = 1;
    while (v && step <= 2 * horizon) {
      orb.points.push_back(*v);
      orb.steps.push_back(step);
      if (v->second != 0 && v->first == v->second) {  // e01 = [1:1:0]: C3 coordinate x0/x1 = 1
        orb.collision = true;
        orb.collision_step = step;
        orb.collision_with = "e01";
        break;
      }
      std::optional<std::pair<Rat, Rat>> w = moebius_value_proj(c3q, *v);
      v = w ? moebius_value_proj(qc3, *w) : std::nullopt;
      step += 2;
    }
    orb.truncated = !orb.collision && step > 2 * horizon;
    rep.orbits.push_back(std::move(orb));
  }

  if (n % 2 == 0) {
    // C1, C2, P1..P_{n-2} all land on 1/a_n in P_{n-1}; the fiber
    // indeterminacy point there is (-1)^{n-1}/a_n = -1/a_n.
    std::string pn1 = "P" + std::to_string(n - 1);
    MoebiusMap mp = induced_fiber_map(k, atlas.at(pn1), atlas.at(pn1));
    Rat bad = Rat(-1) / par.coeffs[n];
    for (std::string curve : {std::string("C1"), std::string("C2")}) {
      OrbitReport::Orbit orb;
      orb.curve = curve;
      orb.fiber = pn1;
      MoebiusMap img = induced_fiber_map(k, atlas.at(curve), atlas.at(pn1));
      std::optional<Rat> v = moebius_value(img, Rat(0));
      int step = 1;
      while (v && step <= horizon) {
        orb.points.push_back({*v, Rat(1)});
        orb.steps.push_back(step);
        if (*v == bad) {
          orb.collision = true;
          orb.collision_step = step;
          orb.collision_with = "fiber indeterminacy on " + pn1;
          break;
        }
        v = moebius_value(mp, *v);
        ++step;
      }
      orb.truncated = !orb.collision && step > horizon;
      rep.orbits.push_back(std::move(orb));
    }
  } else {
    // n odd: C1, C2 land on -a_{n-1}/a_n^2 in P_n; P_n <-> P_{n-2} is a
    // two-cycle and the indeterminacy point is (a_{n-1}-(n-1)a_n)/a_n^2.
    std::string pn = "P" + std::to_string(n);
    std::string pn2 = n >= 3 ? "P" + std::to_string(n - 2) : "E1";
    MoebiusMap down = induced_fiber_map(k, atlas.at(pn), atlas.at(pn2));
    MoebiusMap up = induced_fiber_map(k, atlas.at(pn2), atlas.at(pn));
    Rat an = par.coeffs[n], an1 = par.coeffs[n - 1];
    Rat bad = (an1 - Rat(n - 1) * an) / (an * an);
    for (std::string curve : {std::string("C1"), std::string("C2")}) {
      OrbitReport::Orbit orb;
      orb.curve = curve;
      orb.fiber = pn;
      MoebiusMap img = induced_fiber_map(k, atlas.at(curve), atlas.at(pn));
      std::optional<Rat> v = moebius_value(img, Rat(0));
      int step = 1;
      while (v && step <= 2 * horizon) {
        orb.points.push_back({*v, Rat(1)});
        orb.steps.push_back(step);
        if (*v == bad) {
          orb.collision = true;
          orb.collision_step = step;
          orb.collision_with = "fiber indeterminacy on " + pn;
          break;
        }
        std::optional<Rat> w = moebius_value(down, *v);
        v = w ? moebius_value(up, *w) : std::nullopt;
        step += 2;
      }
      orb.truncated = !orb.collision && step > 2 * horizon;
      rep.orbits.push_back(std::move(orb));
    }
  }
  for (auto& o : rep.orbits) rep.any_collision = rep.any_collision || o.collision;
  return rep;
}

}  // namespace kmap
