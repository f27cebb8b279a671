#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace magfiber {

/// Shortest-safe decimal form with 17 significant digits (lossless for doubles).
std::string format_double(double x);

/// Parses a full double; throws ParseError (line 0) on trailing garbage.
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string to_csv(const CsvTable& table);
/// Reads numeric CSV with a header line; ParseError carries the 1-based line number.
CsvTable parse_csv(std::string_view text);

/// Writes to a temporary sibling and renames it into place, so readers never
/// see a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit hash, hex encoded; used to fingerprint input files in manifests.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace magfiber
