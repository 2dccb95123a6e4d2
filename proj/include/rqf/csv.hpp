#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rqf {

/// Shortest round-trip decimal form; never depends on the global locale.
std::string format_number(double value);

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x columns as in the file
};

/// Reads a header row followed by numeric rows. Throws std::runtime_error
/// with the line number on malformed input.
NumericTable read_numeric_csv(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rqf
