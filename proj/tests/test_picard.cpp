#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kmap/picard.hpp"

using namespace kmap;

namespace {

std::vector<BigInt> P(std::initializer_list<long long> v) {
  std::vector<BigInt> r;
  for (auto x : v) r.push_back(x);
  return r;
}

}  // namespace

TEST_CASE("basis sizes and labels") {
  CHECK(pic_basis('X', 2).names == std::vector<std::string>{"H", "E1", "Q", "P1"});
  CHECK(pic_basis('Y', 1).names == std::vector<std::string>{"H", "E1", "Q", "P1", "E2"});
  CHECK(pic_basis('Y', 3).size() == 6);
  CHECK(pic_basis('Z', 3).size() == 12);
}

TEST_CASE("even-family characteristic polynomial contains x(x-1)(x^2-(n+1)x-1)") {
  for (int n : {2, 4, 6}) {
    IntMatrix M = pic_matrix('X', n);
    auto cp = charpoly(M);
    std::vector<BigInt> q1, q2, q3;
    bool ok = poly_divides(P({-1, -(n + 1), 1}), cp, &q1) &&  // x^2 - (n+1)x - 1
              poly_divides(P({-1, 1}), q1, &q2) &&            // x - 1
              poly_divides(P({0, 1}), q2, &q3);               // x
    INFO("n = ", n);
    CHECK(ok);
  }
}

TEST_CASE("spectral radius of x^2 - 3x - 1") {
  CHECK(std::abs(spectral_radius(P({-1, -3, 1})) - 3.302775637731995) < 1e-9);
}

TEST_CASE("odd-family characteristic polynomial divisible by x^3-nx^2-(n+1)x-1") {
  for (int n : {1, 3, 5}) {
    INFO("n = ", n);
    CHECK(poly_divides(P({-1, -(n + 1), -n, 1}), charpoly(pic_matrix('Y', n))));
  }
  // at n = 1 the factor has all roots off the unit circle yet the map is
  // integrable; the quotient is (x-1)^2
  auto cp = charpoly(pic_matrix('Y', 1));
  std::vector<BigInt> q;
  REQUIRE(poly_divides(P({-1, -2, -1, 1}), cp, &q));
  CHECK(q == P({1, -2, 1}));
}

TEST_CASE("cubic subfamily: isometry, spectrum, growth") {
  IntMatrix Z = pic_matrix('Z', 3);
  IntMatrix G = intersection_form('Z', 3);
  CHECK(check_isometry(Z, G));
  for (auto& z : poly_roots(charpoly(Z))) CHECK(std::abs(std::abs(z) - 1.0) < 1e-9);
  CHECK(nilpotency_index(Z, 1) == 3);
  CHECK(growth_class(Z) == GrowthClass::quadratic);
  // (lambda-1)^8 (lambda+1)^4
  std::vector<BigInt> q;
  auto cp = charpoly(Z);
  std::vector<BigInt> lm1 = P({-1, 1}), lp1 = P({1, 1});
  int e1 = 0, e2 = 0;
  while (poly_divides(lm1, cp, &q)) {
    cp = q;
    ++e1;
  }
  while (poly_divides(lp1, cp, &q)) {
    cp = q;
    ++e2;
  }
  CHECK(e1 == 8);
  CHECK(e2 == 4);
  CHECK(cp.size() == 1);
}

TEST_CASE("growth classes across the families") {
  CHECK(growth_class(pic_matrix('X', 2)) == GrowthClass::exponential);
  CHECK(growth_class(pic_matrix('Y', 3)) == GrowthClass::exponential);
  CHECK(growth_class(pic_matrix('Z', 3)) == GrowthClass::quadratic);
}

TEST_CASE("predicted degree sequences") {
  auto pd = predicted_degrees(pic_matrix('X', 2), 5);
  CHECK(pd == std::vector<BigInt>{5, 16, 53, 175, 578});
  auto pd3 = predicted_degrees(pic_matrix('Y', 3), 3);
  CHECK(pd3 == std::vector<BigInt>{7, 27, 110});
  auto pz = predicted_degrees(pic_matrix('Z', 3), 10);
  CHECK(pz == std::vector<BigInt>{7, 17, 39, 65, 103, 145, 199, 257, 327, 401});
}

TEST_CASE("pullback of a line computed on the tower matches the matrix") {
  for (auto spec : {std::pair<char, int>{'X', 2}, {'X', 4}, {'Y', 3}, {'Y', 1}}) {
    FamilyParams par;
    par.n = spec.second;
    par.coeffs.resize(par.n + 1);
    for (int j = 0; j <= par.n; ++j) par.coeffs[j] = Rat(3 + 2 * j);
    DivisorClass col = pullback_H_column(par, spec.first);
    IntMatrix M = pic_matrix(spec.first, spec.second);
    REQUIRE(col.size() == M.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
      INFO(spec.first, spec.second, " row ", i);
      CHECK(col[i] == M[i][0]);
    }
  }
  FamilyParams par = FamilyParams::cubic(Rat(3), Rat(5));
  DivisorClass col = pullback_H_column(par, 'Z');
  IntMatrix M = pic_matrix('Z', 3);
  REQUIRE(col.size() == M.size());
  for (std::size_t i = 0; i < col.size(); ++i) CHECK(col[i] == M[i][0]);
}

TEST_CASE("charpoly utilities") {
  // companion of x^2 - x - 1
  IntMatrix F = {{BigInt(1), BigInt(1)}, {BigInt(1), BigInt(0)}};
  CHECK(charpoly(F) == P({-1, -1, 1}));
  CHECK(std::abs(spectral_radius(charpoly(F)) - (1 + std::sqrt(5.0)) / 2) < 1e-12);
  CHECK(poly_divides(P({-1, 1}), P({1, -2, 1})));        // (x-1) | (x-1)^2
  CHECK_FALSE(poly_divides(P({1, 1}), P({1, -2, 1})));   // (x+1) does not
  CHECK(squarefree_part(P({1, -2, 1})) == P({-1, 1}));   // (x-1)^2 -> x-1
}
