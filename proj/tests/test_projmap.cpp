#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kmap/dense.hpp"
#include "kmap/projmap.hpp"

using namespace kmap;

namespace {

// reproducible coefficient draws, avoiding 0 and the degenerate values 2/m
std::vector<Rat> draw_coeffs(int n, std::mt19937_64& rng) {
  std::vector<Rat> c(n + 1);
  for (auto& x : c) {
    bool bad = true;
    while (bad) {
      long long num = (long long)(rng() % 21) - 10;
      long long den = (long long)(rng() % 5) + 1;
      x = Rat(num, den);
      bad = (x == 0);
      for (int m = 1; m <= 64 && !bad; ++m) bad = (x == Rat(2, m));
    }
  }
  return c;
}

FamilyParams draw_params(int n, std::mt19937_64& rng) {
  FamilyParams par;
  par.n = n;
  par.coeffs = draw_coeffs(n, rng);
  return par;
}

}  // namespace

TEST_CASE("iota and j_F are involutions") {
  RingPtr ring = plane_ring();
  Rat one(1);
  ProjMap<Rat> id = identity_map<Rat>(ring, one);
  ProjMap<Rat> iota = build_iota(ring, one);
  CHECK(map_equal(compose(iota, iota), id));
  std::mt19937_64 rng(2024);
  for (int n = 0; n <= 4; ++n) {
    for (int t = 0; t < 4; ++t) {
      FamilyParams par = draw_params(n, rng);
      auto a = coeff_polys(par, ring, one);
      ProjMap<Rat> jf = build_jf(ring, a, one);
      CHECK(map_equal(compose(jf, jf), id));
    }
  }
}

TEST_CASE("closed form of k agrees with the composition j_F o iota") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(99);
  for (int n : {1, 2, 3}) {
    for (int t = 0; t < 3; ++t) {
      FamilyParams par = draw_params(n, rng);
      auto a = coeff_polys(par, ring, one);
      ProjMap<Rat> k = build_k(ring, a, one);
      ProjMap<Rat> kc = compose(build_jf(ring, a, one), build_iota(ring, one));
      CHECK(map_equal(k, kc));
      CHECK(k.degree() == 2 * n + 1);
    }
  }
}

TEST_CASE("k composed with its inverse is the identity") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(4242);
  for (int n : {1, 2, 3}) {
    FamilyParams par = draw_params(n, rng);
    auto a = coeff_polys(par, ring, one);
    auto cat = make_catalog(par, ring, one);
    ProjMap<Rat> k = build_k(ring, a, one);
    ProjMap<Rat> kinv = build_k_inverse(ring, a, one);
    CHECK(map_equal(compose(k, kinv, cat.inverse_defining(), true),
                    identity_map<Rat>(ring, one)));
    CHECK(map_equal(compose(kinv, k, cat.forward_defining(), true),
                    identity_map<Rat>(ring, one)));
  }
}

TEST_CASE("curve parametrizations lie on their defining polynomials") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 3, 4}) {
    FamilyParams par = draw_params(n, rng);
    auto cat = make_catalog(par, ring, one);
    for (auto& c : cat.curves) {
      std::vector<MultiPoly<Rat>> im = {c.param[0], c.param[1], c.param[2]};
      CHECK(substitute(c.defining, im).is_zero_poly());
    }
  }
}

TEST_CASE("Jacobian of k factors with the expected exponents") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(31);
  for (int n : {1, 2, 3, 4}) {
    FamilyParams par = draw_params(n, rng);
    auto a = coeff_polys(par, ring, one);
    auto cat = make_catalog(par, ring, one);
    std::vector<ParamCurve<Rat>> fw(cat.curves.begin(), cat.curves.begin() + 4);
    auto jac = jacobian_factored(build_k(ring, a, one), fw);
    CHECK(jac.exponents == std::vector<int>{3 * n - 3, 3 * n - 1, 2, 1});
    CHECK(jac.constant_remainder());
  }
}

TEST_CASE("exceptional curve images") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(606);
  for (int n : {2, 3}) {
    for (int t = 0; t < 5; ++t) {
      FamilyParams par = draw_params(n, rng);
      auto a = coeff_polys(par, ring, one);
      auto cat = make_catalog(par, ring, one);
      ProjMap<Rat> k = build_k(ring, a, one);
      // C1, C2, C3 collapse to points; C4 lands at [1 : a0 - 1 : 0]
      for (const char* nm : {"C1", "C2", "C3"})
        CHECK(image_of_curve(k, cat.by_name(nm), one).is_point);
      auto i4 = image_of_curve(k, cat.by_name("C4"), one);
      REQUIRE(i4.is_point);
      REQUIRE(i4.point.x[0] != 0);
      CHECK(i4.point.x[2] == 0);
      CHECK(i4.point.x[1] / i4.point.x[0] == par.coeffs[0] - 1);
    }
  }
}

TEST_CASE("base points of k on its exceptional curves") {
  RingPtr ring = plane_ring();
  Rat one(1);
  FamilyParams par;
  par.n = 2;
  par.coeffs = {Rat(3), Rat(-1), Rat(2)};
  auto a = coeff_polys(par, ring, one);
  auto cat = make_catalog(par, ring, one);
  ProjMap<Rat> k = build_k(ring, a, one);
  // every component of k vanishes somewhere on C3 (the line x1 = 0 carries
  // the indeterminacy point e1 = [0:0:1])
  auto bp = base_points_on_curve(k, cat.by_name("C3"));
  CHECK((bp.curve_in_base_locus || !bp.roots.empty()));
}

TEST_CASE("degree sequence: rational and prime-field arithmetic agree") {
  FamilyParams par;
  par.n = 2;
  par.coeffs = {Rat(3), Rat(-1), Rat(2)};
  auto dq = degree_sequence_rational(par, 3);
  auto dp = degree_sequence(par, 3, ArithmeticMode::PrimeField);
  REQUIRE(dq.degrees.size() == 3);
  CHECK(dq.degrees == dp.degrees);
  CHECK(dq.degrees == std::vector<long>{5, 16, 53});
}

TEST_CASE("degree sequence determinism for a fixed seed") {
  FamilyParams par;
  par.n = 2;
  par.coeffs = {Rat(3), Rat(5), Rat(7)};
  auto d1 = degree_sequence(par, 4, ArithmeticMode::PrimeField, 0, 2000000, 42);
  auto d2 = degree_sequence(par, 4, ArithmeticMode::PrimeField, 0, 2000000, 42);
  CHECK(d1.degrees == d2.degrees);
  CHECK(d1.prime == d2.prime);
}

TEST_CASE("cubic subfamily preserves its pencil of cubics") {
  RingPtr ring = plane_ring();
  Rat one(1);
  std::mt19937_64 rng(71);
  for (int t = 0; t < 10; ++t) {
    Rat aa, bb;
    do {
      aa = Rat((long long)(rng() % 17) - 8, (long long)(rng() % 3) + 1);
    } while (aa == 0);
    bb = Rat((long long)(rng() % 17) - 8, (long long)(rng() % 3) + 1);
    FamilyParams par = FamilyParams::cubic(aa, bb);
    auto a = coeff_polys(par, ring, one);
    ProjMap<Rat> k = build_k(ring, a, one);
    auto [p1, p2] = cubic_invariant(ring, one, aa, bb);
    CHECK(check_invariant(k, p1, p2));
  }
}
