#pragma once

#include <filesystem>
#include <string>

#include "gdl/geometry.hpp"
#include "gdl/grid.hpp"
#include "json.hpp"

namespace gdl::io {

using nlohmann::json;

/// 17 significant digits, shortest round-trip form is not attempted.
std::string fmt(double x);

/// Writes to a temporary sibling and renames it into place. Throws Errc::io.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Point cloud as CSV ("x1,...,xn,w") plus a JSON sidecar at path + ".json" holding dim_d,
/// resolution_h, ar_constant, seed and whatever `extra` carries (config hash, version).
void write_measure(const std::filesystem::path& csv_path, const DiscreteMeasure& mu, const json& extra = {});
DiscreteMeasure read_measure(const std::filesystem::path& csv_path);

/// Grid as CSV: "index,x1,...,xn,value" per node.
void write_grid_csv(const std::filesystem::path& path, const ScalarGrid& g, const json& extra = {});
/// Raw little-endian float64 values plus a JSON header at path + ".json" (box, shape, spacing, axes).
void write_grid_binary(const std::filesystem::path& path, const ScalarGrid& g, const json& extra = {});
ScalarGrid read_grid_binary(const std::filesystem::path& path);

json to_json(const Ball& b);
json to_json(const AffinePlane& p);
json to_json(const Eigen::VectorXd& v);

}  // namespace gdl::io
