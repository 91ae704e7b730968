#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kmap/charts.hpp"

using namespace kmap;

namespace {

// num/den == expect_num/expect_den as polynomials
bool mo_eq(const MoebiusMap& m, const RPoly& en, const RPoly& ed) {
  if (!m.defined || m.infinite) return false;
  return poly_equal(m.num * ed, en * m.den);
}

FamilyParams ramp(int n) {
  FamilyParams par;
  par.n = n;
  par.coeffs.resize(n + 1);
  for (int j = 0; j <= n; ++j) par.coeffs[j] = Rat(2 + j);
  return par;
}

}  // namespace

TEST_CASE("chart round trips in every tower") {
  for (auto spec : {std::pair<char, int>{'X', 2}, {'X', 4}, {'Y', 1}, {'Y', 3}, {'Y', 5}}) {
    ChartAtlas A = build_tower(ramp(spec.second), spec.first, true);
    int uv = A.ring->index("u"), ev = A.ring->index("eta");
    for (auto& c : A.charts) {
      INFO(spec.first, spec.second, " chart ", c.name);
      CHECK(chart_round_trip(c, uv, ev));
    }
    for (auto& c : A.curves) {
      INFO(spec.first, spec.second, " curve chart ", c.name);
      CHECK(chart_round_trip(c, uv, ev));
    }
  }
  ChartAtlas A = build_tower(FamilyParams::cubic(Rat(1), Rat(1)), 'Z', true);
  int uv = A.ring->index("u"), ev = A.ring->index("eta");
  for (auto& c : A.charts) {
    INFO("Z chart ", c.name);
    CHECK(chart_round_trip(c, uv, ev));
  }
}

TEST_CASE("even tower: fiber maps on E1, P1, Q and the C4 image (n = 2)") {
  FamilyParams par;
  par.n = 2;
  par.coeffs = {Rat(1), Rat(1), Rat(1)};
  ChartAtlas A = build_tower(par, 'X', true);
  RingPtr R = A.ring;
  RPoly eta = RPoly::variable(R, R->index("eta"), Rat(1));
  RPoly one = RPoly::constant(R, Rat(1));
  const RPoly &a0 = A.acoef[0], &a2 = A.acoef[2];
  ProjMap<Rat> k = atlas_map(A);

  CHECK(mo_eq(induced_fiber_map(k, A.at("E1"), A.at("E1")), RPoly::zero(R) - eta, eta + one));
  CHECK(mo_eq(induced_fiber_map(k, A.at("P1"), A.at("P1")), eta, one + a2 * eta));
  CHECK(mo_eq(induced_fiber_map(k, A.at("Q"), A.at("C3")), one, a0 - eta));
  CHECK(mo_eq(induced_fiber_map(k, A.at("C3"), A.at("Q")), RPoly::zero(R) - one, eta));
  MoebiusMap c1 = induced_fiber_map(k, A.at("C1"), A.at("P1"));
  CHECK((mo_eq(c1, one, a2) && c1.is_constant(R->index("eta"))));
  MoebiusMap c2 = induced_fiber_map(k, A.at("C2"), A.at("P1"));
  CHECK((mo_eq(c2, one, a2) && c2.is_constant(R->index("eta"))));
  MoebiusMap c4 = induced_plane_image(k, A.at("C4"));
  REQUIRE((!c4.to_fiber && c4.defined));
  CHECK(c4.plane[2].is_zero_poly());
  CHECK(poly_equal(c4.plane[1], (a0 - one) * c4.plane[0]));
}

TEST_CASE("odd tower: contracted fibers and the two-cycle (n = 3)") {
  FamilyParams par;
  par.n = 3;
  par.coeffs = {Rat(1), Rat(1), Rat(1), Rat(1)};
  ChartAtlas A = build_tower(par, 'Y', true);
  RingPtr R = A.ring;
  RPoly eta = RPoly::variable(R, R->index("eta"), Rat(1));
  RPoly one = RPoly::constant(R, Rat(1));
  const RPoly &a2 = A.acoef[2], &a3 = A.acoef[3];
  ProjMap<Rat> k = atlas_map(A);

  MoebiusMap c1 = induced_fiber_map(k, A.at("C1"), A.at("P3"));
  CHECK((mo_eq(c1, RPoly::zero(R) - a2, a3 * a3) && c1.is_constant(R->index("eta"))));
  MoebiusMap c2 = induced_fiber_map(k, A.at("C2"), A.at("P3"));
  CHECK((mo_eq(c2, RPoly::zero(R) - a2, a3 * a3) && c2.is_constant(R->index("eta"))));
  MoebiusMap p3p1 = induced_fiber_map(k, A.at("P3"), A.at("P1"));
  MoebiusMap p1p3 = induced_fiber_map(k, A.at("P1"), A.at("P3"));
  CHECK((p3p1.defined && !p3p1.infinite));
  CHECK((p1p3.defined && !p1p3.infinite));
  // the self-map of the last fiber before the two-cycle: eta / (a_n eta - 1)
  CHECK(mo_eq(induced_fiber_map(k, A.at("P2"), A.at("P2")), eta, a3 * eta - one));
}

TEST_CASE("odd tower: closed form of the two-cycle orbit (n = 3)") {
  FamilyParams q;
  q.n = 3;
  q.coeffs = {Rat(5), Rat(7, 3), Rat(4), Rat(3, 2)};
  ChartAtlas B = build_tower(q, 'Y', false);
  ProjMap<Rat> kq = atlas_map(B);
  MoebiusMap down = induced_fiber_map(kq, B.at("P3"), B.at("P1"));
  MoebiusMap up = induced_fiber_map(kq, B.at("P1"), B.at("P3"));
  Rat a3 = q.coeffs[3], a2 = q.coeffs[2];
  Rat v = -a2 / (a3 * a3);
  // after 2m returns to the top fiber the value is (4m a3 - (4m+1) a2) / a3^2
  for (int j = 1; j <= 10; ++j) {
    auto w = moebius_value(down, v);
    REQUIRE(w);
    auto z = moebius_value(up, *w);
    REQUIRE(z);
    v = *z;
    if (j % 2 == 0) {
      int m = j / 2;
      CHECK(v == (Rat(4 * m) * a3 - Rat(4 * m + 1) * a2) / (a3 * a3));
    }
  }
}

TEST_CASE("cubic tower: exceptional cycles") {
  FamilyParams par = FamilyParams::cubic(Rat(1), Rat(1));
  ChartAtlas A = build_tower(par, 'Z', true);
  RingPtr R = A.ring;
  RPoly eta = RPoly::variable(R, R->index("eta"), Rat(1));
  RPoly one = RPoly::constant(R, Rat(1));
  const RPoly &a = A.acoef[3], &b = A.acoef[1];
  ProjMap<Rat> k = atlas_map(A);

  CHECK(mo_eq(induced_fiber_map(k, A.at("E2"), A.at("P5")), (b + b) - a - eta - one, a * a));
  for (auto arrow : {std::pair<const char*, const char*>{"C1", "P4"},
                     {"C2", "P6"},
                     {"C4", "E01"},
                     {"P6", "R"},
                     {"P4", "C1"},
                     {"P5", "E2"}}) {
    MoebiusMap m = induced_fiber_map(k, A.at(arrow.first), A.at(arrow.second));
    INFO(arrow.first, " -> ", arrow.second, ": ", m.note);
    CHECK((m.defined && !m.infinite));
  }
}

TEST_CASE("cubic tower: R and E01 land on the inverse exceptional curves") {
  FamilyParams pq = FamilyParams::cubic(Rat(2), Rat(5));
  ChartAtlas B = build_tower(pq, 'Z', false);
  ProjMap<Rat> kq = atlas_map(B);
  CurveCatalog<Rat> cat = make_catalog(pq, plane_ring(), Rat(1));
  auto on_curve = [&](const MoebiusMap& m, const MultiPoly<Rat>& def) {
    if (!m.defined) return false;
    return substitute_plane(def, m.plane, B.ring).is_zero_poly();
  };
  CHECK(on_curve(induced_plane_image(kq, B.at("R")), cat.by_name("C2p").defining));
  CHECK(on_curve(induced_plane_image(kq, B.at("E01")), cat.by_name("C4p").defining));
}

TEST_CASE("genericity flags") {
  FamilyParams gen;
  gen.n = 2;
  gen.coeffs = {Rat(3), Rat(5), Rat(7)};
  CHECK(genericity_report(gen).generic());

  FamilyParams a1;
  a1.n = 2;
  a1.coeffs = {Rat(1), Rat(1), Rat(1)};
  CHECK_FALSE(genericity_report(a1).generic());
  CHECK(genericity_report(a1).a0_m == 2);  // a0 = 1 = 2/2

  FamilyParams a2;
  a2.n = 2;
  a2.coeffs = {Rat(2), Rat(1), Rat(1)};
  CHECK(genericity_report(a2).a0_two_over_m);
  CHECK(genericity_report(a2).a0_m == 1);

  FamilyParams res;
  res.n = 3;
  res.coeffs = {Rat(3), Rat(0), Rat(1), Rat(1)};
  CHECK(genericity_report(res).odd_resonance);
}

TEST_CASE("orbit collisions at a0 = 2/m and only there") {
  for (int m : {1, 2, 3}) {
    FamilyParams p;
    p.n = 2;
    p.coeffs = {Rat(2, m), Rat(3), Rat(5)};
    OrbitReport rep = exceptional_orbit_report(p, 64);
    bool found = false;
    for (auto& o : rep.orbits)
      if (o.curve == "C4" && o.collision && o.collision_with == "e01" &&
          o.collision_step == 2 * m - 1)
        found = true;
    INFO("a0 = 2/", m);
    CHECK(found);
  }
  FamilyParams gen;
  gen.n = 2;
  gen.coeffs = {Rat(3), Rat(5), Rat(7)};
  OrbitReport rep = exceptional_orbit_report(gen, 20);
  CHECK_FALSE(rep.any_collision);
  // the orbit of the C1/C2 landing point 1/a2 marches along 1/(m a2)
  for (auto& o : rep.orbits)
    if (o.curve == "C1") {
      REQUIRE(o.points.size() >= 5);
      for (std::size_t i = 0; i < o.points.size(); ++i) {
        REQUIRE(o.points[i].second == Rat(1));
        CHECK(o.points[i].first == Rat(1) / (Rat((int)i + 1) * gen.coeffs[2]));
      }
    }
}
