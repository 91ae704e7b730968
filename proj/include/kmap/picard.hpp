#pragma once
// Pullback action on the Picard group of the blowup towers, with exact
// integer linear algebra: characteristic polynomials, spectral radius,
// growth classification, and predicted degree sequences.

#include <algorithm>
#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmap/charts.hpp"
#include "kmap/projmap.hpp"
#include "kmap/scalar.hpp"

namespace kmap {

// A divisor class in the basis (H, fibers...) with exact integer entries.
using DivisorClass = std::vector<BigInt>;
using IntMatrix = std::vector<std::vector<BigInt>>;  // row-major, square

struct PicBasis {
  char family = 'X';  // 'X' even, 'Y' odd, 'Z' cubic subfamily
  int n = 2;
  std::vector<std::string> names;  // "H" followed by the fiber names

  int index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return (int)i;
    return -1;
  }
  int size() const { return (int)names.size(); }
};

inline PicBasis pic_basis(char family, int n) {
  PicBasis b;
  b.family = family;
  b.n = n;
  b.names = {"H", "E1", "Q"};
  if (family == 'X') {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("pic_basis: X needs even n >= 2");
    for (int j = 1; j <= n - 1; ++j) b.names.push_back("P" + std::to_string(j));
  } else if (family == 'Y') {
    if (n < 1 || n % 2 != 1) throw std::invalid_argument("pic_basis: Y needs odd n >= 1");
    if (n == 1) {
      b.names = {"H", "E1", "Q", "P1", "E2"};
    } else {
      for (int j = 1; j <= n; ++j) b.names.push_back("P" + std::to_string(j));
    }
  } else if (family == 'Z') {
    if (n != 3) throw std::invalid_argument("pic_basis: Z needs n = 3");
    b.names = {"H", "E1", "Q", "P1", "P2", "P3", "E2", "E01", "P4", "P5", "P6", "R"};
  } else {
    throw std::invalid_argument("pic_basis: unknown family");
  }
  return b;
}

// ---------------------------------------------------------------------------
// Pullback matrices.  Column j holds the class of the pullback of basis
// element j.  Entries follow from the images of the exceptional curves and
// fibers together with the vanishing orders of the coordinate functions
// along the tower fibers.
// ---------------------------------------------------------------------------
inline IntMatrix pic_matrix(char family, int n) {
  PicBasis b = pic_basis(family, n);
  int N = b.size();
  IntMatrix M(N, std::vector<BigInt>(N, 0));
  auto col = [&](const std::string& name) -> int { return b.index(name); };
  auto set = [&](const std::string& row, int c, long long v) { M[b.index(row)][c] = v; };

  if (family == 'X') {
    // H -> (2n+1)H - nE1 - (n+1)Q - (n+1) sum j P_j
    int cH = col("H");
    set("H", cH, 2 * n + 1);
    set("E1", cH, -n);
    set("Q", cH, -(n + 1));
    for (int j = 1; j <= n - 1; ++j) set("P" + std::to_string(j), cH, -(long long)(n + 1) * j);
    // E1 -> E1
    set("E1", col("E1"), 1);
    // Q -> H - E1 - Q - sum j P_j
    int cQ = col("Q");
    set("H", cQ, 1);
    set("E1", cQ, -1);
    set("Q", cQ, -1);
    for (int j = 1; j <= n - 1; ++j) set("P" + std::to_string(j), cQ, -j);
    // P_j -> 0 for j <= n-2; P_{n-1} -> 2H - E1 - Q - sum j P_j
    int cP = col("P" + std::to_string(n - 1));
    set("H", cP, 2);
    set("E1", cP, -1);
    set("Q", cP, -1);
    for (int j = 1; j <= n - 1; ++j) set("P" + std::to_string(j), cP, -j);
    return M;
  }

  if (family == 'Y' && n == 1) {
    // Degenerate tower (E1, Q, P1, E2): here C1 maps onto itself, C2 is the
    // only exceptional line, and P1 and E2 form a two-cycle.
    // columns:        H   E1   Q   P1   E2
    long long D[5][5] = {{3, 0, 1, 1, 0},
                         {-1, 1, -1, 0, 0},
                         {-2, 0, -1, 0, 0},
                         {0, 0, 0, 0, 1},
                         {-1, 0, 0, 0, 0}};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) M[i][j] = D[i][j];
    return M;
  }

  if (family == 'Y') {
    // H -> (2n+1)H - nE1 - (n+1)Q - (n+1) sum_{j<n} j P_j - n^2 P_n
    int cH = col("H");
    set("H", cH, 2 * n + 1);
    set("E1", cH, -n);
    set("Q", cH, -(n + 1));
    for (int j = 1; j <= n - 1; ++j) set("P" + std::to_string(j), cH, -(long long)(n + 1) * j);
    set("P" + std::to_string(n), cH, -(long long)n * n);
    // E1 -> E1
    set("E1", col("E1"), 1);
    // Q -> H - E1 - Q - sum_{j<n} j P_j - (n-1) P_n
    int cQ = col("Q");
    set("H", cQ, 1);
    set("E1", cQ, -1);
    set("Q", cQ, -1);
    for (int j = 1; j <= n - 1; ++j) set("P" + std::to_string(j), cQ, -j);
    set("P" + std::to_string(n), cQ, -(n - 1));
    // P_j -> 0 for j <= n-3; P_{n-2} -> P_n; P_{n-1} -> P_{n-1}
    if (n >= 3) set("P" + std::to_string(n), col("P" + std::to_string(n - 2)), 1);
    set("P" + std::to_string(n - 1), col("P" + std::to_string(n - 1)), 1);
    // P_n -> 2H - E1 - Q - sum_{j<=n-2} j P_j - n P_{n-1} - n P_n
    int cP = col("P" + std::to_string(n));
    set("H", cP, 2);
    set("E1", cP, -1);
    set("Q", cP, -1);
    for (int j = 1; j <= n - 2; ++j) set("P" + std::to_string(j), cP, -j);
    set("P" + std::to_string(n - 1), cP, -n);
    set("P" + std::to_string(n), cP, -n);
    return M;
  }

  // family == 'Z': the cubic automorphism subfamily.
  // columns:  H   E1  Q   P1  P2  P3  E2 E01  P4  P5  P6   R
  long long D[12][12] = {
      {7, 0, 1, 0, 0, 0, 0, 2, 1, 0, 1, 0},      // H
      {-3, 1, -1, 0, 0, 0, 0, -1, -1, 0, 0, 0},  // E1
      {-4, 0, -1, 0, 0, 0, 0, -2, -1, 0, 0, 0},  // Q
      {-4, 0, -1, 0, 0, 1, 0, -1, -2, 0, 0, 0},  // P1
      {-8, 0, -2, 0, 1, 0, 0, -2, -3, 0, 0, 0},  // P2
      {-9, 0, -2, 1, 0, 0, 0, -2, -3, 0, 0, 0},  // P3
      {-3, 0, 0, 0, 0, 0, 0, -1, -1, 1, -1, 0},  // E2
      {-4, 0, -1, 0, 0, 0, 0, -1, 0, 0, -1, 0},  // E01
      {-10, 0, -2, 0, 0, 0, 0, -2, -3, 0, 0, 0}, // P4
      {-10, 0, -2, 0, 0, 0, 1, -2, -3, 0, 0, 0}, // P5
      {-10, 0, -2, 0, 0, 0, 0, -2, -3, 0, 0, 1}, // P6
      {-6, 0, 0, 0, 0, 0, 0, -2, -1, 0, -1, 0}}; // R
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) M[i][j] = D[i][j];
  return M;
}

// ---------------------------------------------------------------------------
// Intersection form for the cubic tower.  The basis elements are the classes
// of the actual fibers; expressing them through the orthogonal point classes
// (one -1 per blowup) needs the incidences between blowup centers and strict
// fibers: q, p1, p2 lie on the strict E1; p_{j+1} lies on the strict P_j for
// j = 1..5; r lies on the strict E2.
// ---------------------------------------------------------------------------
inline IntMatrix intersection_form(char family, int n) {
  if (family != 'Z' || n != 3)
    throw std::invalid_argument("intersection_form: available for the cubic tower only");
  PicBasis b = pic_basis('Z', 3);
  int N = b.size();
  IntMatrix S(N, std::vector<BigInt>(N, 0));
  for (int i = 0; i < N; ++i) S[i][i] = 1;
  auto on = [&](const std::string& center, const std::string& fiber) {
    S[b.index(center)][b.index(fiber)] -= 1;
  };
  on("Q", "E1");
  on("P1", "E1");
  on("P2", "E1");
  for (int j = 1; j <= 5; ++j) on("P" + std::to_string(j + 1), "P" + std::to_string(j));
  on("R", "E2");
  // G = S^T J S with J = diag(1, -1, ..., -1)
  IntMatrix G(N, std::vector<BigInt>(N, 0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      BigInt acc = 0;
      for (int k = 0; k < N; ++k) {
        BigInt t = S[k][i] * S[k][j];
        acc += (k == 0 ? t : -t);
      }
      G[i][j] = acc;
    }
  return G;
}

inline IntMatrix mat_mul(const IntMatrix& A, const IntMatrix& B) {
  int N = (int)A.size();
  IntMatrix C(N, std::vector<BigInt>(N, 0));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      if (A[i][k] == 0) continue;
      for (int j = 0; j < N; ++j) C[i][j] += A[i][k] * B[k][j];
    }
  return C;
}

inline bool check_isometry(const IntMatrix& M, const IntMatrix& G) {
  int N = (int)M.size();
  // M^T G M == G
  IntMatrix GM = mat_mul(G, M);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      BigInt acc = 0;
      for (int k = 0; k < N; ++k) acc += M[k][i] * GM[k][j];
      if (acc != G[i][j]) return false;
    }
  return true;
}

// Characteristic polynomial by the Faddeev-LeVerrier recurrence (exact
// integers).  Returns coefficients c_0..c_N with charpoly = sum c_k x^k,
// normalized so c_N = 1.
inline std::vector<BigInt> charpoly(const IntMatrix& M) {
  int N = (int)M.size();
  std::vector<BigInt> c(N + 1, 0);
  c[N] = 1;
  IntMatrix Mk(N, std::vector<BigInt>(N, 0));  // running M * B_{k-1}
  for (int i = 0; i < N; ++i) Mk[i][i] = 1;
  for (int k = 1; k <= N; ++k) {
    Mk = mat_mul(M, Mk);
    BigInt tr = 0;
    for (int i = 0; i < N; ++i) tr += Mk[i][i];
    BigInt ck = -tr / k;  // exact by the recurrence
    c[N - k] = ck;
    for (int i = 0; i < N; ++i) Mk[i][i] += ck;
  }
  return c;
}

// Exact polynomial division of charpoly-style integer polynomials; returns
// true and the quotient when the division is exact over the integers.
inline bool poly_divides(const std::vector<BigInt>& divisor, const std::vector<BigInt>& p,
                         std::vector<BigInt>* quotient = nullptr) {
  std::vector<BigInt> r = p;
  int dd = (int)divisor.size() - 1;
  while (dd >= 0 && divisor[dd] == 0) --dd;
  if (dd < 0) return false;
  int dr = (int)r.size() - 1;
  while (dr >= 0 && r[dr] == 0) --dr;
  if (dr < dd && !(dr < 0)) return false;
  std::vector<BigInt> q(std::max(0, dr - dd + 1), 0);
  while (dr >= dd) {
    if (r[dr] % divisor[dd] != 0) return false;
    BigInt f = r[dr] / divisor[dd];
    q[dr - dd] = f;
    for (int i = 0; i <= dd; ++i) r[dr - dd + i] -= f * divisor[i];
    while (dr >= 0 && r[dr] == 0) --dr;
  }
  for (auto& x : r)
    if (x != 0) return false;
  if (quotient) *quotient = q;
  return true;
}

// Square-free part p / gcd(p, p'), computed exactly over the rationals, so
// the numeric root finder never sees a multiple root.
inline std::vector<BigInt> squarefree_part(const std::vector<BigInt>& c) {
  auto deg = [](const std::vector<Rat>& p) {
    int d = (int)p.size() - 1;
    while (d >= 0 && p[d] == 0) --d;
    return d;
  };
  std::vector<Rat> p(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) p[i] = Rat(c[i]);
  int dp = deg(p);
  if (dp <= 1) return c;
  std::vector<Rat> q(dp);
  for (int i = 1; i <= dp; ++i) q[i - 1] = p[i] * i;
  // Euclidean gcd over Q
  std::vector<Rat> a = p, b = q;
  while (deg(b) >= 0) {
    int da = deg(a), db = deg(b);
    if (da < db) { std::swap(a, b); continue; }
    std::vector<Rat> r = a;
    while ((da = deg(r)) >= db) {
      Rat f = r[da] / b[db];
      for (int i = 0; i <= db; ++i) r[da - db + i] -= f * b[i];
    }
    a = b;
    b = r;
  }
  int dg = deg(a);
  if (dg <= 0) return c;
  // exact division p / a
  std::vector<Rat> rem = p, quo(dp - dg + 1, Rat(0));
  for (int dr = deg(rem); dr >= dg; dr = deg(rem)) {
    Rat f = rem[dr] / a[dg];
    quo[dr - dg] = f;
    for (int i = 0; i <= dg; ++i) rem[dr - dg + i] -= f * a[i];
  }
  // clear denominators
  BigInt lcm = 1;
  for (auto& x : quo) lcm = boost::multiprecision::lcm(lcm, denominator(x));
  std::vector<BigInt> out(quo.size());
  for (std::size_t i = 0; i < quo.size(); ++i) out[i] = numerator(quo[i] * Rat(lcm));
  return out;
}

// All complex roots of the square-free part by the Durand-Kerner iteration.
// Multiplicities are dropped; use this for root locations and moduli.
inline std::vector<std::complex<double>> poly_roots(const std::vector<BigInt>& craw) {
  std::vector<BigInt> c = squarefree_part(craw);
  int d = (int)c.size() - 1;
  while (d >= 0 && c[d] == 0) --d;
  if (d <= 0) return {};
  std::vector<std::complex<double>> a(d + 1);
  for (int i = 0; i <= d; ++i) a[i] = (double)c[i] / (double)c[d];
  std::vector<std::complex<double>> z(d);
  std::complex<double> seed(0.4, 0.9);
  std::complex<double> w(1.0, 0.0);
  for (int i = 0; i < d; ++i) {
    w *= seed;
    z[i] = w;
  }
  for (int it = 0; it < 500; ++it) {
    double delta = 0;
    for (int i = 0; i < d; ++i) {
      std::complex<double> num = a[d];
      for (int k = d - 1; k >= 0; --k) num = num * z[i] + a[k];
      std::complex<double> den(1.0, 0.0);
      for (int j = 0; j < d; ++j)
        if (j != i) den *= (z[i] - z[j]);
      std::complex<double> step = num / den;
      z[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-14) break;
  }
  return z;
}

// Largest root modulus, refined by Newton iteration on the dominant real
// root when one exists (these characteristic polynomials always have a real
// dominant root or dominant roots on the unit circle).
inline double spectral_radius(const std::vector<BigInt>& c) {
  std::vector<std::complex<double>> roots = poly_roots(c);
  double rho = 0;
  for (auto& z : roots) rho = std::max(rho, std::abs(z));
  // refine with Newton if the dominant root is real
  int d = (int)c.size() - 1;
  while (d >= 0 && c[d] == 0) --d;
  auto eval = [&](double x, double& fp) {
    double f = (double)c[d];
    fp = 0;
    for (int k = d - 1; k >= 0; --k) {
      fp = fp * x + f;
      f = f * x + (double)c[k];
    }
    return f;
  };
  for (double sign : {1.0, -1.0}) {
    double x = sign * rho;
    bool ok = true;
    for (int it = 0; it < 100 && ok; ++it) {
      double fp, f = eval(x, fp);
      if (fp == 0) { ok = false; break; }
      double nx = x - f / fp;
      if (std::abs(nx - x) < 1e-15 * std::max(1.0, std::abs(x))) { x = nx; break; }
      x = nx;
    }
    if (ok && std::abs(std::abs(x) - rho) < 1e-6) return std::abs(x);
  }
  return rho;
}

// Exact rank over the rationals by fraction-free Gaussian elimination.
inline int mat_rank(IntMatrix A) {
  int N = (int)A.size();
  int rank = 0;
  for (int c = 0; c < N && rank < N; ++c) {
    int piv = -1;
    for (int r = rank; r < N; ++r)
      if (A[r][c] != 0) { piv = r; break; }
    if (piv < 0) continue;
    std::swap(A[piv], A[rank]);
    for (int r = rank + 1; r < N; ++r) {
      if (A[r][c] == 0) continue;
      BigInt f1 = A[rank][c], f2 = A[r][c];
      for (int j = c; j < N; ++j) A[r][j] = A[r][j] * f1 - A[rank][j] * f2;
    }
    ++rank;
  }
  return rank;
}

// Nilpotency index of (M - lambda I) on the generalized eigenspace: smallest
// k with rank((M - lambda I)^k) = rank((M - lambda I)^{k+1}).
inline int nilpotency_index(const IntMatrix& M, long long lambda) {
  int N = (int)M.size();
  IntMatrix A = M;
  for (int i = 0; i < N; ++i) A[i][i] -= lambda;
  IntMatrix P = A;
  int prev = mat_rank(P);
  for (int k = 1; k <= N; ++k) {
    IntMatrix Q = mat_mul(P, A);
    int r = mat_rank(Q);
    if (r == prev) return k;
    prev = r;
    P = std::move(Q);
  }
  return N;
}

enum class GrowthClass { bounded, linear, quadratic, exponential };

inline const char* growth_class_name(GrowthClass g) {
  switch (g) {
    case GrowthClass::bounded: return "bounded";
    case GrowthClass::linear: return "linear";
    case GrowthClass::quadratic: return "quadratic";
    case GrowthClass::exponential: return "exponential";
  }
  return "unknown";
}

// Degree growth of the iterates, read off from the pullback matrix: the
// spectral radius when it exceeds 1, otherwise the size of the largest
// Jordan block at a root of modulus 1.
inline GrowthClass growth_class(const IntMatrix& M, double* rho_out = nullptr) {
  std::vector<BigInt> cp = charpoly(M);
  double rho = spectral_radius(cp);
  if (rho_out) *rho_out = rho;
  if (rho > 1 + 1e-9) return GrowthClass::exponential;
  int k = nilpotency_index(M, 1);
  // eigenvalue -1 can also carry blocks, but for degree growth only the
  // block at +1 matters for these towers
  if (k >= 3) return GrowthClass::quadratic;
  if (k == 2) return GrowthClass::linear;
  return GrowthClass::bounded;
}

// (M^m)_{HH}: the predicted degree of the m-th iterate, for m = 1..count.
inline std::vector<BigInt> predicted_degrees(const IntMatrix& M, int count) {
  int N = (int)M.size();
  std::vector<BigInt> out;
  std::vector<BigInt> col(N, 0);  // M^m applied to e_H, tracked incrementally
  col[0] = 1;
  for (int m = 1; m <= count; ++m) {
    std::vector<BigInt> next(N, 0);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) next[i] += M[i][k] * col[k];
    col = std::move(next);
    out.push_back(col[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Empirical H column: deg(k) H minus the order of vanishing of a pulled-back
// generic line along each tower fiber.  Must agree with the H column of
// pic_matrix.
// ---------------------------------------------------------------------------
inline DivisorClass pullback_H_column(const FamilyParams& par, char family) {
  ChartAtlas atlas = build_tower(par, family, false);
  ProjMap<Rat> k = atlas_map(atlas);
  RPoly h = RPoly::variable(atlas.ring, atlas.ring->index("x0"), Rat(3)) +
            RPoly::variable(atlas.ring, atlas.ring->index("x1"), Rat(7)) +
            RPoly::variable(atlas.ring, atlas.ring->index("x2"), Rat(11));
  DivisorClass col(atlas.charts.size() + 1, 0);
  col[0] = k.degree();
  for (std::size_t i = 0; i < atlas.charts.size(); ++i)
    col[i + 1] = -order_of_vanishing(h, atlas.charts[i], &k);
  return col;
}

}  // namespace kmap
