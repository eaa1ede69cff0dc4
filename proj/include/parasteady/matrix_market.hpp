#pragma once

#include "parasteady/types.hpp"

#include <string>

namespace parasteady {

/// Reads a Matrix Market coordinate file (real, general or symmetric).
/// Symmetric storage is expanded to a full matrix.  Duplicate entries are
/// summed during assembly.  Malformed headers, pattern/complex fields, and
/// out-of-range indices are rejected.
SparseMatrix read_matrix_market(const std::string& path);

/// Writes a sparse matrix as Matrix Market coordinate/real/general with
/// shortest round-trip number formatting.
void write_matrix_market(const std::string& path, const SparseMatrix& matrix);

}  // namespace parasteady
