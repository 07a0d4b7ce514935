#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcrbtrack/pcrb.hpp"
#include "pcrbtrack/sdp.hpp"

namespace pcrbtrack {

enum class CheckStatus { kPass, kFail, kSkipped };
const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kFail;
  std::string detail;
};

struct SelftestOptions {
  const SdpBackend* sdp = nullptr;  // null: SDP checks are skipped
  FormulaMutation mutation;         // applied to the closed-form PCRB under test
  std::uint64_t seed = 12345;
};

/// Oracle cross-checks: closed-form vs matrix-inverse PCRB, analytic vs
/// finite-difference Jacobian, grid vs root-finding vs SDP inner minimizers,
/// SCA vs DP backup plans, and the hover and max-endurance power values.
std::vector<CheckResult> run_selftest(const SelftestOptions& opt);

}  // namespace pcrbtrack
