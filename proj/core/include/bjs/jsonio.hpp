#pragma once

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace bjs {

using Json = nlohmann::json;

// Canonical float policy: every double is rounded through a fixed 12
// significant digit decimal form before it enters a report, so dumps are
// byte-stable across runs and platforms with the same arithmetic.
inline double canonical_round(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline Json num(double v) { return Json(canonical_round(v)); }

inline std::string canonical_dump(const Json& j) { return j.dump(2); }

}  // namespace bjs
