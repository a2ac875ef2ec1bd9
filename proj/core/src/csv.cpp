#include "spectrascreen/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

[[noreturn]] void cell_error(std::size_t row, std::size_t col,
                             const std::string& what) {
  std::ostringstream msg;
  msg << "row " << row << ", column " << col << ": " << what;
  throw ValidationError(msg.str());
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("failed to format number");
  return std::string(buf, ptr);
}

LabeledTable read_labeled_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header row");
  const auto header = split(line);
  if (header.size() < 3 || trim(header[0]) != "id" ||
      trim(header[1]) != "label") {
    throw FormatError("header must start with 'id,label' and name at least one column");
  }
  LabeledTable table;
  for (std::size_t c = 2; c < header.size(); ++c) {
    table.columns.emplace_back(trim(header[c]));
  }
  const std::size_t width = table.columns.size();

  std::vector<double> flat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row << ": expected " << header.size()
          << " cells, found " << cells.size();
      throw ValidationError(msg.str());
    }
    table.ids.emplace_back(trim(cells[0]));
    double label = 0.0;
    if (!parse_number(cells[1], label) || (label != 0.0 && label != 1.0)) {
      cell_error(row, 2, "label must be 0 or 1");
    }
    table.labels.push_back(static_cast<int>(label));
    for (std::size_t c = 2; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v)) cell_error(row, c + 1, "not a number");
      if (!std::isfinite(v)) cell_error(row, c + 1, "value is not finite");
      flat.push_back(v);
    }
  }
  table.values.resize(static_cast<Eigen::Index>(row),
                      static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < row; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          flat[r * width + c];
    }
  }
  return table;
}

LabeledTable read_labeled_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_labeled_table(in);
}

void write_labeled_table(const LabeledTable& table, std::ostream& out) {
  out << "id,label";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    out << table.ids[static_cast<std::size_t>(r)] << ','
        << table.labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out << ',' << format_double(table.values(r, c));
    }
    out << '\n';
  }
}

SpectraDataset parse_spectra_csv(std::istream& in) {
  LabeledTable table = read_labeled_table(in);
  std::vector<double> wavenumbers;
  wavenumbers.reserve(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    double v = 0.0;
    if (!parse_number(table.columns[c], v)) {
      throw FormatError("header column " + std::to_string(c + 3) +
                        " is not a wavenumber");
    }
    wavenumbers.push_back(v);
  }
  WavenumberGrid grid(std::move(wavenumbers));
  return SpectraDataset(std::move(grid), std::move(table.values),
                        std::move(table.labels), std::move(table.ids));
}

SpectraDataset load_spectra_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_spectra_csv(in);
}

void write_spectra_csv(const SpectraDataset& ds, std::ostream& out) {
  LabeledTable table;
  for (double w : ds.grid().values()) table.columns.push_back(format_double(w));
  table.ids = ds.ids();
  table.labels = ds.labels();
  table.values = ds.x();
  write_labeled_table(table, out);
}

}  // namespace spectrascreen
