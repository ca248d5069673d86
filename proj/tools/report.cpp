#include "report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "berman/format.hpp"

namespace berman::cli {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::cell(double v) { return cell(std::isnan(v) ? std::string() : format_double(v)); }

CsvTable& CsvTable::cell(std::uint64_t v) { return cell(std::to_string(v)); }

CsvTable& CsvTable::cell(std::string v) {
  current_.push_back(std::move(v));
  return *this;
}

CsvTable& CsvTable::empty() { return cell(std::string()); }

void CsvTable::end_row() {
  if (current_.size() != header_.size()) {
    throw std::logic_error("csv row has " + std::to_string(current_.size()) + " cells, header has " +
                           std::to_string(header_.size()));
  }
  rows_.push_back(std::move(current_));
  current_.clear();
}

std::string CsvTable::render(const Metadata& meta) const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  out += "# config_hash=fnv1a64:" + meta.config_hash + "\n";
  out += "# seed=" + (meta.seed ? std::to_string(*meta.seed) : std::string("none")) + "\n";
  out += "# version=" + meta.version + "\n";
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + file.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + file.string() + "'");
}

}  // namespace berman::cli
