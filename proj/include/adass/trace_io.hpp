#pragma once

#include <string>
#include <vector>

#include "adass/sampler.hpp"

namespace adass {

// Binary matrix container: 16-byte header ("SFTR", u32 rows, u32 cols,
// u32 count) followed by `count` row-major little-endian float64 matrices.
void write_sftr(const std::string& path, const std::vector<Matrix>& matrices);
std::vector<Matrix> read_sftr(const std::string& path);

/// Scalar trace CSV: iteration,xi,support_size,psi.
void write_trace_csv(const std::string& path, const ChainTrace& trace);
/// Reads the scalar columns back; matrices are left empty.
ChainTrace read_trace_csv(const std::string& path);

}  // namespace adass
