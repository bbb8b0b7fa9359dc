#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace treegibbs {

struct VerifyCase {
  std::string name;
  std::string tolerance;  // human-readable acceptance rule for this case
  bool pass = false;
  double worst = 0;  // worst observed error or margin, case-specific
  std::int64_t checks = 0;
  std::string detail;
};

struct VerifySummary {
  std::vector<VerifyCase> cases;
  int failed = 0;
};

// Inference-vs-enumeration matrix plus closed-form, counting and Peierls
// suites. quick trims the matrix for smoke runs; seed drives the randomized
// case selection only.
VerifySummary run_verify(bool quick, std::uint64_t seed);

std::string verify_text(const VerifySummary& s);

}  // namespace treegibbs
