#pragma once

// Named-tensor container:
//
//   AUCAP-CKPT v1
//   meta <n>            followed by n bytes of JSON and a newline
//   tensor <name> <rows> <cols>
//   ...
//   end
//   <one AUCAP-EMB v1 dtype=f64 block per tensor, in manifest order>

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace aucap::nn {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

struct TensorStore {
  std::string metadata = "{}";
  std::vector<NamedTensor> tensors;

  const Eigen::MatrixXd* find(std::string_view name) const;
  /// Errc::missing_artifact when absent, Errc::dimension_mismatch on shape.
  const Eigen::MatrixXd& require(std::string_view name, Eigen::Index rows, Eigen::Index cols) const;

  /// Writes to a temporary sibling and renames into place.
  void save(const std::filesystem::path& path) const;
  /// Errc::not_found, or Errc::malformed for a corrupt manifest/payload.
  static TensorStore load(const std::filesystem::path& path);
};

}  // namespace aucap::nn
