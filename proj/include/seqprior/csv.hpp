#ifndef SEQPRIOR_CSV_HPP_
#define SEQPRIOR_CSV_HPP_

#include <cstdio>
#include <string>

namespace seqprior {

inline constexpr const char* kVersion = "0.1.0";

// Round-trip-safe numeric formatting (17 significant digits).
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace seqprior

#endif  // SEQPRIOR_CSV_HPP_
