#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aucap {

enum class Errc {
  not_found,
  malformed,
  unsupported,
  dimension_mismatch,
  invalid_argument,
  empty_input,
  missing_artifact,
  hash_mismatch,
  io_failure,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries a category so callers (and
/// the CLI exit path) can tell a missing file from a corrupt one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// 64-bit FNV-1a. Used for content hashes in caches and checkpoints.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace aucap
