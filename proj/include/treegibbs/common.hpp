#pragma once
#include <limits>
#include <stdexcept>
#include <string>

namespace treegibbs {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kBuildId = "treegibbs 0.1.0";

// config_error -> exit 2, guard_error -> exit 3, numeric_error -> exit 4.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One-sided tail bound. A bound is vacuous once it stops constraining a
// probability (value >= 1) or its defining series diverges; vacuous bounds are
// first-class values, comparisons against them are skipped, never faked.
struct Bound {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool vacuous = true;
  bool divergent = false;
};

inline double nan_d() { return std::numeric_limits<double>::quiet_NaN(); }
inline double inf_d() { return std::numeric_limits<double>::infinity(); }

}  // namespace treegibbs
