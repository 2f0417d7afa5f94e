#include "ldikit/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ldikit/error.hpp"
#include "ldikit/version.hpp"

namespace ldikit::bundle {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kArraySuffix = ".f64";

void swap_if_big_endian(char* bytes, std::size_t n_values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < n_values; ++i) {
      std::reverse(bytes + 8 * i, bytes + 8 * (i + 1));
    }
  } else {
    (void)bytes;
    (void)n_values;
  }
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

void write_f64(const fs::path& path, std::span<const double> values) {
  std::string bytes(values.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), values.data(), bytes.size());
  swap_if_big_endian(bytes.data(), values.size());
  write_file(path, bytes);
}

std::vector<double> read_f64(const fs::path& path) {
  std::string bytes = read_file(path);
  if (bytes.size() % sizeof(double) != 0) {
    throw DataError("'" + path.string() + "' is not a float64 array");
  }
  const std::size_t n = bytes.size() / sizeof(double);
  swap_if_big_endian(bytes.data(), n);
  std::vector<double> values(n);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

void write_model_bundle(const fs::path& dir, const ModelBundle& bundle) {
  fs::create_directories(dir);
  Json manifest = bundle.manifest;
  manifest["format"] = "ldikit-model";
  manifest["toolkit_version"] = kToolkitVersion;
  Json arrays = Json::object();
  for (const auto& [name, matrix] : bundle.arrays) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor rm = matrix;
    const std::string file = name + std::string(kArraySuffix);
    write_f64(dir / file, std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
    arrays[name] = {{"file", file}, {"rows", matrix.rows()}, {"cols", matrix.cols()},
                    {"dtype", "float64-le"}, {"order", "row-major"}};
  }
  manifest["arrays"] = arrays;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ModelBundle read_model_bundle(const fs::path& dir) {
  ModelBundle bundle;
  try {
    bundle.manifest = Json::parse(read_file(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw DataError("bad manifest in '" + dir.string() + "': " + e.what());
  }
  if (bundle.manifest.value("format", "") != "ldikit-model") {
    throw DataError("'" + dir.string() + "' is not a model bundle");
  }
  for (const auto& [name, info] : bundle.manifest.at("arrays").items()) {
    const auto rows = info.at("rows").get<Eigen::Index>();
    const auto cols = info.at("cols").get<Eigen::Index>();
    const auto values = read_f64(dir / info.at("file").get<std::string>());
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
      throw DataError("array '" + name + "' has " + std::to_string(values.size()) +
                      " values, manifest says " + std::to_string(rows) + "x" +
                      std::to_string(cols));
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    bundle.arrays.emplace(name, std::move(m));
  }
  return bundle;
}

}  // namespace ldikit::bundle
