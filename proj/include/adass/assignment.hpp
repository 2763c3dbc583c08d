#pragma once

#include <vector>

#include "adass/rng.hpp"

namespace adass {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3)). Returns `col` with row i matched to column col[i].
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace adass
