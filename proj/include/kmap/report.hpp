#pragma once
// Report assembly shared by the command-line tool: deterministic JSON
// serialization of configurations and results.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmap/picard.hpp"
#include "kmap/projmap.hpp"

namespace kmap {

using Json = nlohmann::ordered_json;

inline const char* kmap_version() { return "0.1.0"; }

inline std::string rat_str(const Rat& r) { return r.str(); }

inline Json json_params(const FamilyParams& par) {
  Json j;
  j["n"] = par.n;
  Json cs = Json::array();
  for (auto& c : par.coeffs) cs.push_back(rat_str(c));
  j["coeffs"] = cs;
  j["cubic_family"] = par.is_cubic_family();
  return j;
}

inline Json json_divisor(const DivisorClass& d, const PicBasis& b) {
  Json j;
  for (int i = 0; i < b.size(); ++i) j[b.names[i]] = d[i].str();
  return j;
}

inline Json json_matrix(const IntMatrix& M) {
  Json rows = Json::array();
  for (auto& r : M) {
    Json row = Json::array();
    for (auto& x : r) row.push_back(x.str());
    rows.push_back(row);
  }
  return rows;
}

inline Json json_poly_coeffs(const std::vector<BigInt>& c) {
  Json j = Json::array();
  for (auto& x : c) j.push_back(x.str());
  return j;
}

struct ReportEnvelope {
  Json config;
  Json results;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;

  Json to_json() const {
    Json j;
    j["config"] = config;
    j["results"] = results;
    j["warnings"] = warnings;
    j["version"] = kmap_version();
    j["seed"] = seed;
    return j;
  }
};

}  // namespace kmap
