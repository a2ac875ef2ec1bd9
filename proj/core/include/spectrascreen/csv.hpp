#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spectrascreen/data.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen {

// Generic `id,label,<col>...` table. Spectra files use wavenumbers as column
// names; score files use t1..tN.
struct LabeledTable {
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  std::vector<int> labels;
  Matrix values;
};

LabeledTable read_labeled_table(std::istream& in);
LabeledTable read_labeled_table(const std::filesystem::path& path);
void write_labeled_table(const LabeledTable& table, std::ostream& out);

// Header `id,label,<wavenumber_1>,...,<wavenumber_M>`, wavenumbers strictly
// decreasing, labels in {0,1}. Errors cite the 1-based data row and column.
SpectraDataset parse_spectra_csv(std::istream& in);
SpectraDataset load_spectra_csv(const std::filesystem::path& path);

void write_spectra_csv(const SpectraDataset& ds, std::ostream& out);

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

}  // namespace spectrascreen
