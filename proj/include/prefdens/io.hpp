#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prefdens {

// Shortest text form that round-trips a double (17 significant digits).
std::string fmt_double(double v);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Minimal CSV: comma separated, no quoting. Returns header + rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

// Git-style blob hash (SHA-1 over "blob <len>\0<content>"), lowercase hex.
std::string git_blob_hash(std::string_view content);

}  // namespace prefdens
