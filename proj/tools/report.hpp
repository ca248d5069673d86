#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace berman::cli {

/// Trailing `#` block of every CSV. Worker count is deliberately absent so
/// that output bytes do not depend on it.
struct Metadata {
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::string version;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Numbers use the shortest round-trip form; NaN is written as an empty field.
  CsvTable& cell(double v);
  CsvTable& cell(std::uint64_t v);
  CsvTable& cell(std::string v);
  CsvTable& empty();
  void end_row();

  std::size_t rows() const noexcept { return rows_.size(); }
  std::string render(const Metadata& meta) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> current_;
};

/// Throws std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& file, const std::string& content);

}  // namespace berman::cli
