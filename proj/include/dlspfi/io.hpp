#pragma once

// File formats shared by the library and the CLI.

#include "dlspfi/spf_basis.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dlspfi {

/// "key = value" lines, '#' comments, blank lines ignored. Keys may repeat;
/// order is preserved.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);

nlohmann::json spec_to_json(const SPFBasisSpec& spec);
SPFBasisSpec spec_from_json(const nlohmann::json& j);

/// Self-describing record {N, L, zeta, tau, kind, values}.
nlohmann::json coefficients_to_json(const CoefficientVector& c);
CoefficientVector coefficients_from_json(const nlohmann::json& j);

std::string_view to_string(CoefficientKind kind);

// Header line of JSON, newline, then rows*cols doubles (column-major,
// little-endian). "rows" and "columns" are added to the header on write.
void write_array_file(const std::filesystem::path& path, const nlohmann::json& header,
                      const Eigen::MatrixXd& data);
std::pair<nlohmann::json, Eigen::MatrixXd> read_array_file(const std::filesystem::path& path);

/// Per-voxel attenuation rows on one scheme.
struct SignalFile {
  std::string scheme_ref;  // path of the scheme the rows refer to, informational
  std::vector<std::vector<double>> voxels;

  std::size_t sample_count() const { return voxels.empty() ? 0 : voxels.front().size(); }
};

// Text format:
//   # dlspfi-signals v1
//   scheme <path>
//   voxels <V>
//   samples <S>
//   then V rows of S values
void write_signal_file(const std::filesystem::path& path, const SignalFile& f);
SignalFile read_signal_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used to tag experiment outputs with their configuration.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace dlspfi
