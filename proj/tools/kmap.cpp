// Command-line front end: show the family maps, compute degree sequences
// empirically and against the Picard prediction, dump pullback matrices,
// and run the verification suites.
//
// Exit codes: 0 success, 1 check failure, 2 usage error, 3 resource budget.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmap/charts.hpp"
#include "kmap/dense.hpp"
#include "kmap/picard.hpp"
#include "kmap/projmap.hpp"
#include "kmap/report.hpp"

using namespace kmap;

namespace {

struct Options {
  int n = -1;
  std::string coeffs;
  std::string cubic;
  int iters = 4;
  std::string mode = "prime";
  std::uint64_t prime = 0;
  int horizon = 64;
  std::uint64_t seed = 20240901;
  std::string format = "json";
  std::string out;
  std::string suite = "all";
};

Rat parse_rat(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace((unsigned char)c)) t += c;
  if (t.empty()) throw std::invalid_argument("empty rational");
  return Rat(t);
}

std::vector<Rat> parse_rat_list(const std::string& s) {
  std::vector<Rat> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rat(item));
  return out;
}

FamilyParams make_params(const Options& opt, std::vector<std::string>& warnings) {
  if (!opt.cubic.empty()) {
    std::vector<Rat> ab = parse_rat_list(opt.cubic);
    if (ab.size() != 2) throw std::invalid_argument("--cubic expects \"a,b\"");
    if (ab[0] == 0) throw std::invalid_argument("--cubic needs a != 0");
    return FamilyParams::cubic(ab[0], ab[1]);
  }
  FamilyParams par;
  par.n = opt.n >= 0 ? opt.n : 2;
  if (!opt.coeffs.empty()) {
    par.coeffs = parse_rat_list(opt.coeffs);
  } else {
    // reproducible random coefficients from the seed
    std::mt19937_64 rng(opt.seed);
    par.coeffs.resize(par.n + 1);
    for (auto& c : par.coeffs) c = Rat((long long)(rng() % 37) + 2, (long long)(rng() % 7) + 1);
    if (par.n >= 1 && par.coeffs[par.n] == 0) par.coeffs[par.n] = Rat(1);
    warnings.push_back("coefficients drawn from seed " + std::to_string(opt.seed));
  }
  par.validate();
  return par;
}

char family_of(const FamilyParams& par) {
  if (par.is_cubic_family()) return 'Z';
  return par.n % 2 == 0 ? 'X' : 'Y';
}

int emit(const ReportEnvelope& rep, const Options& opt, const std::string& tsv,
         const std::string& text) {
  std::string payload;
  if (opt.format == "json")
    payload = rep.to_json().dump(2) + "\n";
  else if (opt.format == "tsv")
    payload = tsv.empty() ? rep.to_json().dump(2) + "\n" : tsv;
  else
    payload = text.empty() ? rep.to_json().dump(2) + "\n" : text;
  if (!opt.out.empty()) {
    std::ofstream f(opt.out);
    if (!f) {
      std::cerr << "cannot open output path: " << opt.out << "\n";
      return 2;
    }
    f << payload;
  } else {
    std::cout << payload;
  }
  return 0;
}

std::string poly_text(const MultiPoly<Rat>& p) { return poly_print(p); }

Json json_map(const ProjMap<Rat>& m) {
  Json j;
  Json comps = Json::array();
  for (int i = 0; i < 3; ++i) comps.push_back(poly_text(m.comp[i]));
  j["components"] = comps;
  j["degree"] = m.degree();
  j["label"] = m.label;
  return j;
}

// ---------------------------------------------------------------------------
// show
// ---------------------------------------------------------------------------
int cmd_show(const Options& opt) {
  ReportEnvelope rep;
  rep.seed = opt.seed;
  FamilyParams par = make_params(opt, rep.warnings);
  rep.config = {{"subcommand", "show"}, {"params", json_params(par)}};
  RingPtr ring = plane_ring();
  auto a = coeff_polys(par, ring, Rat(1));
  ProjMap<Rat> k, kinv;
  bool have_inverse = par.n >= 1;
  if (par.n >= 1) {
    k = build_k(ring, a, Rat(1));
    kinv = build_k_inverse(ring, a, Rat(1));
  } else {
    k = compose(build_jf(ring, a, Rat(1)), build_iota(ring, Rat(1)), {}, true);
    rep.warnings.push_back("n = 0: closed form unavailable, map built by composition");
  }
  rep.results["k"] = json_map(k);
  if (have_inverse) rep.results["k_inverse"] = json_map(kinv);
  if (par.n >= 1) {
    auto cat = make_catalog(par, ring, Rat(1));
    std::vector<ParamCurve<Rat>> fw(cat.curves.begin(), cat.curves.begin() + 4);
    auto jac = jacobian_factored(k, fw);
    Json jj;
    for (std::size_t i = 0; i < jac.names.size(); ++i) jj[jac.names[i]] = jac.exponents[i];
    jj["remainder_degree"] = jac.remainder.total_degree();
    rep.results["jacobian_exponents"] = jj;
    Json imgs;
    for (auto& c : fw) {
      auto img = image_of_curve(k, c, Rat(1));
      if (img.is_point)
        imgs[c.name] = {{"point", {rat_str(img.point.x[0]), rat_str(img.point.x[1]),
                                   rat_str(img.point.x[2])}}};
      else
        imgs[c.name] = {{"image_degree", img.image_degree}};
    }
    rep.results["exceptional_images"] = imgs;
    Json bp;
    for (auto& c : fw) {
      auto b = base_points_on_curve(k, c);
      Json roots = Json::array();
      for (auto& r : b.roots) roots.push_back({rat_str(r.first), rat_str(r.second)});
      bp[c.name] = {{"curve_in_base_locus", b.curve_in_base_locus},
                    {"parameter_roots", roots},
                    {"residual_degree", b.residual_degree}};
    }
    rep.results["base_points"] = bp;
  }
  std::ostringstream text;
  text << "k (degree " << k.degree() << "):\n";
  for (int i = 0; i < 3; ++i) text << "  k" << i << " = " << poly_text(k.comp[i]) << "\n";
  if (have_inverse) {
    text << "k^-1 (degree " << kinv.degree() << "):\n";
    for (int i = 0; i < 3; ++i) text << "  " << poly_text(kinv.comp[i]) << "\n";
  }
  return emit(rep, opt, "", text.str());
}

// ---------------------------------------------------------------------------
// degseq
// ---------------------------------------------------------------------------
int cmd_degseq(const Options& opt) {
  ReportEnvelope rep;
  rep.seed = opt.seed;
  FamilyParams par = make_params(opt, rep.warnings);
  if (opt.iters < 1) throw CLI::ValidationError("--iters must be >= 1");
  ArithmeticMode mode =
      opt.mode == "rational" ? ArithmeticMode::Rational : ArithmeticMode::PrimeField;
  rep.config = {{"subcommand", "degseq"},
                {"params", json_params(par)},
                {"iters", opt.iters},
                {"mode", opt.mode},
                {"prime", opt.prime}};
  DegreeSequenceResult res = degree_sequence(par, opt.iters, mode, opt.prime, 2000000, opt.seed);
  for (auto& w : res.warnings) rep.warnings.push_back(w);
  std::vector<BigInt> pred;
  char fam = family_of(par);
  if (par.n >= 1) pred = predicted_degrees(pic_matrix(fam, par.n), opt.iters);
  Json rows = Json::array();
  std::ostringstream tsv;
  tsv << "m\tdeg\tpredicted\tratio\n";
  bool all_match = true;
  for (std::size_t i = 0; i < res.degrees.size(); ++i) {
    Json row;
    row["m"] = i + 1;
    row["deg"] = res.degrees[i];
    double ratio = i > 0 && res.degrees[i - 1] > 0
                       ? (double)res.degrees[i] / (double)res.degrees[i - 1]
                       : 0.0;
    std::string predicted = i < pred.size() ? pred[i].str() : "";
    row["predicted"] = predicted;
    bool match = i < pred.size() && pred[i] == res.degrees[i];
    if (i < pred.size() && !match) all_match = false;
    row["match"] = match;
    row["ratio"] = ratio;
    rows.push_back(row);
    tsv << (i + 1) << "\t" << res.degrees[i] << "\t" << predicted << "\t" << ratio << "\n";
  }
  rep.results["degrees"] = rows;
  rep.results["prime"] = res.prime;
  rep.results["budget_exceeded"] = res.budget_exceeded;
  rep.results["all_match"] = all_match;
  if (res.budget_exceeded) rep.warnings.push_back("term budget exceeded; sequence truncated");
  int rc = emit(rep, opt, tsv.str(), tsv.str());
  if (rc) return rc;
  return res.budget_exceeded ? 3 : 0;
}

// ---------------------------------------------------------------------------
// pic
// ---------------------------------------------------------------------------
int cmd_pic(const Options& opt) {
  ReportEnvelope rep;
  rep.seed = opt.seed;
  FamilyParams par = make_params(opt, rep.warnings);
  if (par.n < 1) throw CLI::ValidationError("pic needs n >= 1");
  char fam = family_of(par);
  rep.config = {{"subcommand", "pic"}, {"params", json_params(par)}, {"family", std::string(1, fam)}};
  PicBasis basis = pic_basis(fam, par.n);
  IntMatrix M = pic_matrix(fam, par.n);
  auto cp = charpoly(M);
  double rho = 0;
  GrowthClass g = growth_class(M, &rho);
  rep.results["basis"] = basis.names;
  rep.results["matrix"] = json_matrix(M);
  rep.results["charpoly"] = json_poly_coeffs(cp);
  rep.results["spectral_radius"] = rho;
  rep.results["growth_class"] = growth_class_name(g);
  // named factor from the degree-growth theorems
  std::vector<BigInt> factor;
  if (fam == 'X')
    factor = {-1, -(par.n + 1), 1};
  else
    factor = {-1, -(par.n + 1), -par.n, 1};
  rep.results["named_factor_divides"] = fam == 'Z' ? false : poly_divides(factor, cp);
  if (fam == 'Z') {
    IntMatrix G = intersection_form('Z', 3);
    rep.results["isometry"] = check_isometry(M, G);
    rep.results["nilpotency_index_at_1"] = nilpotency_index(M, 1);
    rep.warnings.push_back(
        "cubic pullback list: the fiber sent to P6 is R; the final column is the conic class");
  }
  std::ostringstream text;
  text << "family " << fam << ", spectral radius " << rho << ", growth "
       << growth_class_name(g) << "\n";
  return emit(rep, opt, "", text.str());
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------
struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

void run_suite(const std::string& suite, const FamilyParams& par, std::uint64_t seed,
               int horizon, std::vector<Check>& out, std::vector<std::string>& warnings) {
  RingPtr ring = plane_ring();
  auto a = coeff_polys(par, ring, Rat(1));
  auto want = [&](const std::string& s) { return suite == "all" || suite == s; };
  if (want("involutions")) {
    ProjMap<Rat> io = build_iota(ring, Rat(1));
    ProjMap<Rat> jf = build_jf(ring, a, Rat(1));
    ProjMap<Rat> ii = compose(io, io, {}, true);
    ProjMap<Rat> jj = compose(jf, jf, {}, true);
    ProjMap<Rat> id = identity_map<Rat>(ring, Rat(1));
    out.push_back({"iota is an involution", map_equal(ii, id), ""});
    out.push_back({"j_F is an involution", map_equal(jj, id), ""});
  }
  if (want("builders") && par.n >= 1) {
    ProjMap<Rat> k1 = build_k(ring, a, Rat(1));
    ProjMap<Rat> k2 = compose(build_jf(ring, a, Rat(1)), build_iota(ring, Rat(1)), {}, true);
    out.push_back({"closed form equals j_F o iota", map_equal(k1, k2), ""});
  }
  if (want("inverse") && par.n >= 1) {
    ProjMap<Rat> k = build_k(ring, a, Rat(1));
    ProjMap<Rat> ki = build_k_inverse(ring, a, Rat(1));
    auto cat = make_catalog(par, ring, Rat(1));
    ProjMap<Rat> id = compose(k, ki, cat.inverse_defining(), true);
    bool ok = map_equal(id, identity_map<Rat>(ring, Rat(1)));
    out.push_back({"k o k^-1 = id", ok, ok ? "" : "degree " + std::to_string(id.degree())});
  }
  if (want("jacobian") && par.n >= 1) {
    ProjMap<Rat> k = build_k(ring, a, Rat(1));
    auto cat = make_catalog(par, ring, Rat(1));
    std::vector<ParamCurve<Rat>> fw(cat.curves.begin(), cat.curves.begin() + 4);
    auto jac = jacobian_factored(k, fw);
    int n = par.n;
    std::vector<int> expect = {3 * n - 3, 3 * n - 1, 2, 1};
    bool ok = jac.exponents == expect && jac.constant_remainder();
    std::string got;
    for (int e : jac.exponents) got += std::to_string(e) + " ";
    out.push_back({"Jacobian exponents on C1..C4", ok, ok ? "" : "got " + got});
  }
  if (want("exceptional") && par.n >= 1) {
    ProjMap<Rat> k = build_k(ring, a, Rat(1));
    auto cat = make_catalog(par, ring, Rat(1));
    auto i4 = image_of_curve(k, cat.by_name("C4"), Rat(1));
    bool ok = i4.is_point && i4.point.x[2] == 0 && i4.point.x[0] != 0 &&
              i4.point.x[1] / i4.point.x[0] == par.coeffs[0] - 1;
    out.push_back({"C4 maps to [1 : a0-1 : 0]", ok, ""});
  }
  if (want("fibermaps") && par.n >= 1) {
    char fam = par.n % 2 == 0 ? 'X' : 'Y';
    ChartAtlas A = build_tower(par, fam, false);
    ProjMap<Rat> k = atlas_map(A);
    MoebiusMap e1 = induced_fiber_map(k, A.at("E1"), A.at("E1"));
    RingPtr R = A.ring;
    RPoly eta = RPoly::variable(R, R->index("eta"), Rat(1));
    RPoly one = RPoly::constant(R, Rat(1));
    auto mo_eq = [](const MoebiusMap& m, const RPoly& en, const RPoly& ed) {
      return m.defined && !m.infinite && poly_equal(m.num * ed, en * m.den);
    };
    out.push_back({"E1 self-map is -x/(x+1)", mo_eq(e1, RPoly::zero(R) - eta, eta + one), ""});
    MoebiusMap c3q = induced_fiber_map(k, A.at("C3"), A.at("Q"));
    out.push_back({"C3 -> Q is -1/x", mo_eq(c3q, RPoly::zero(R) - one, eta), ""});
  }
  if (want("orbits") && par.n >= 1) {
    OrbitReport orep = exceptional_orbit_report(par, horizon);
    GenericityReport grep = genericity_report(par, horizon);
    bool consistent = !grep.generic() || !orep.any_collision;
    std::string det;
    for (auto& o : orep.orbits)
      if (o.collision)
        det += o.curve + " hits " + o.collision_with + " at step " +
               std::to_string(o.collision_step) + "; ";
    out.push_back({"orbit collisions only under the degenerate parameters", consistent, det});
    if (orep.any_collision) warnings.push_back("orbit collision: " + det);
  }
  if (want("pic") && par.n >= 1) {
    char fam = family_of(par);
    IntMatrix M = pic_matrix(fam, par.n);
    DivisorClass col = pullback_H_column(par, fam);
    bool ok = col.size() == M.size();
    for (std::size_t i = 0; ok && i < col.size(); ++i) ok = col[i] == M[i][0];
    out.push_back({"empirical H column matches the pullback matrix", ok, ""});
  }
  if (want("invariant")) {
    if (par.is_cubic_family()) {
      ProjMap<Rat> k = build_k(ring, a, Rat(1));
      auto [p1, p2] = cubic_invariant(ring, Rat(1), par.coeffs[3], par.coeffs[1]);
      out.push_back({"phi o k = phi", check_invariant(k, p1, p2), ""});
    } else {
      out.push_back({"phi o k = phi", true, "skipped: not the cubic subfamily"});
    }
  }
  if (want("isometry")) {
    if (par.is_cubic_family()) {
      IntMatrix M = pic_matrix('Z', 3);
      out.push_back({"cubic pullback is an isometry", check_isometry(M, intersection_form('Z', 3)), ""});
    } else {
      out.push_back({"cubic pullback is an isometry", true, "skipped: not the cubic subfamily"});
    }
  }
}

int cmd_verify(const Options& opt) {
  static const std::vector<std::string> suites = {"involutions", "builders", "inverse",
                                                  "jacobian",    "exceptional", "fibermaps",
                                                  "orbits",      "pic",      "invariant",
                                                  "isometry",    "all"};
  if (std::find(suites.begin(), suites.end(), opt.suite) == suites.end())
    throw CLI::ValidationError("unknown suite: " + opt.suite);
  ReportEnvelope rep;
  rep.seed = opt.seed;
  FamilyParams par = make_params(opt, rep.warnings);
  rep.config = {{"subcommand", "verify"}, {"suite", opt.suite}, {"params", json_params(par)},
                {"horizon", opt.horizon}};
  std::vector<Check> checks;
  run_suite(opt.suite, par, opt.seed, opt.horizon, checks, rep.warnings);
  Json arr = Json::array();
  bool all = true;
  std::ostringstream text;
  for (auto& c : checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
    text << (c.pass ? "pass  " : "FAIL  ") << c.name
         << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  }
  rep.results["checks"] = arr;
  rep.results["all_pass"] = all;
  int rc = emit(rep, opt, "", text.str());
  if (rc) return rc;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Birational family toolkit: maps, towers, and Picard actions"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--n", opt.n, "family degree n");
    sub->add_option("--coeffs", opt.coeffs, "coefficients a0,a1,...,an (exact rationals)");
    sub->add_option("--cubic", opt.cubic, "cubic subfamily parameters \"a,b\"");
    sub->add_option("--seed", opt.seed, "random seed (recorded in the report)");
    sub->add_option("--format", opt.format, "output format: json | tsv | text")
        ->check(CLI::IsMember({"json", "tsv", "text"}));
    sub->add_option("--out", opt.out, "output path (default stdout)");
  };
  CLI::App* show = app.add_subcommand("show", "display the map, Jacobian, and exceptional data");
  add_common(show);
  CLI::App* degseq = app.add_subcommand("degseq", "empirical vs predicted degree sequence");
  add_common(degseq);
  degseq->add_option("--iters", opt.iters, "number of iterates");
  degseq->add_option("--mode", opt.mode, "arithmetic: rational | prime")
      ->check(CLI::IsMember({"rational", "prime"}));
  degseq->add_option("--prime", opt.prime, "prime modulus (0 = draw from seed)");
  CLI::App* pic = app.add_subcommand("pic", "pullback matrix, charpoly, spectral radius");
  add_common(pic);
  CLI::App* verify = app.add_subcommand("verify", "verification suites");
  add_common(verify);
  verify->add_option("--suite", opt.suite,
                     "involutions|builders|inverse|jacobian|exceptional|fibermaps|orbits|pic|"
                     "invariant|isometry|all");
  verify->add_option("--horizon", opt.horizon, "orbit/genericity scan horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }
  try {
    if (show->parsed()) return cmd_show(opt);
    if (degseq->parsed()) return cmd_degseq(opt);
    if (pic->parsed()) return cmd_pic(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
