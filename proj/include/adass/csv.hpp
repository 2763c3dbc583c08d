#pragma once

#include <string>
#include <vector>

#include "adass/rng.hpp"

namespace adass {

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> header;  // empty when the file had none
};

/// Read a numeric CSV (rows = observations). A first line whose first cell is
/// not numeric is taken as a header. Ragged rows, empty or non-numeric cells
/// raise InputError naming the 1-based line and column.
CsvMatrix read_matrix_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// Subtract column means in place.
void center_columns(Matrix& m);

}  // namespace adass
