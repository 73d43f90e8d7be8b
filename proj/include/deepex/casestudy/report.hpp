#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace deepex::casestudy {

struct ClaimResult {
  std::string id;
  std::string description;
  std::string criterion;
  double estimate = 0.0;
  double std_err = 0.0;
  double ci_low = 0.0;   // 95% normal interval
  double ci_high = 0.0;
  std::size_t trials = 0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();
};

/// Ids accepted by run_claim, in report order.
const std::vector<std::string>& claim_ids();

/// Throws UsageError for an unknown id.
ClaimResult run_claim(const std::string& id, std::uint64_t seed = 0);

nlohmann::json to_json(const ClaimResult& claim);
nlohmann::json make_report(const std::vector<ClaimResult>& claims, std::uint64_t seed);

}  // namespace deepex::casestudy
