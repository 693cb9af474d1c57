#include "aucap/error.hpp"

#include <cstdio>

namespace aucap {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::not_found: return "not found";
    case Errc::malformed: return "malformed input";
    case Errc::unsupported: return "unsupported";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::empty_input: return "empty input";
    case Errc::missing_artifact: return "missing artifact";
    case Errc::hash_mismatch: return "hash mismatch";
    case Errc::io_failure: return "i/o failure";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace aucap
