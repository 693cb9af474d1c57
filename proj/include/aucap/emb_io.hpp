#pragma once

// AUCAP-EMB v1 container: an ASCII header line
//   AUCAP-EMB v1 dim=<D> rows=<R>\n
// followed by R*D little-endian IEEE-754 values, row-major. Plain files hold
// 32-bit floats. Checkpoint payloads append " dtype=f64" to the header and
// store 64-bit doubles so parameters round-trip bitwise.

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace aucap::emb {

enum class Precision { f32, f64 };

struct Header {
  Eigen::Index dim = 0;
  Eigen::Index rows = 0;
  Precision precision = Precision::f32;
};

void write(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& values,
           Precision precision = Precision::f32);

/// Reads one block. Throws Error{malformed} on a bad header or short payload
/// and Error{invalid_argument} on non-finite values.
Eigen::MatrixXd read(std::istream& in);

void save(const std::filesystem::path& path,
          const Eigen::Ref<const Eigen::MatrixXd>& values,
          Precision precision = Precision::f32);

Eigen::MatrixXd load(const std::filesystem::path& path);

/// As load(), but rejects files whose declared dim differs from expected_dim.
Eigen::MatrixXd load(const std::filesystem::path& path, Eigen::Index expected_dim);

Header parse_header(std::string_view line);

}  // namespace aucap::emb
