#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace ldikit::bundle {

using Json = nlohmann::json;

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Raw little-endian float64, no header.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path);

/// A directory holding manifest.json plus one <name>.f64 file per array.
/// Matrices are stored row-major; their shapes live in the manifest.
struct ModelBundle {
  Json manifest = Json::object();
  std::map<std::string, Eigen::MatrixXd> arrays;
};

void write_model_bundle(const std::filesystem::path& dir, const ModelBundle& bundle);
ModelBundle read_model_bundle(const std::filesystem::path& dir);

}  // namespace ldikit::bundle
