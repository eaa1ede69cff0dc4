#include "parasteady/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace parasteady {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Shortest decimal representation that parses back to the same double.
std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("matrix_market: cannot open " + path);

  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("matrix_market: empty file " + path);
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || to_lower(object) != "matrix")
    throw std::runtime_error("matrix_market: bad header in " + path);
  if (to_lower(format) != "coordinate")
    throw std::runtime_error("matrix_market: only coordinate format is supported");
  if (to_lower(field) != "real")
    throw std::runtime_error("matrix_market: only real matrices are supported");
  const std::string sym = to_lower(symmetry);
  if (sym != "general" && sym != "symmetric")
    throw std::runtime_error("matrix_market: only general or symmetric storage is supported");

  std::string line;
  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz))
      throw std::runtime_error("matrix_market: malformed size line in " + path);
    break;
  }
  if (rows < 0 || cols < 0 || nnz < 0)
    throw std::runtime_error("matrix_market: missing size line in " + path);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(sym == "symmetric" ? 2 * nnz : nnz));
  long seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long i, j;
    double v;
    if (!(ls >> i >> j >> v))
      throw std::runtime_error("matrix_market: malformed entry in " + path);
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw std::runtime_error("matrix_market: index out of range in " + path);
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (sym == "symmetric" && i != j)
      trips.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    ++seen;
  }
  if (seen != nnz)
    throw std::runtime_error("matrix_market: expected " + std::to_string(nnz) + " entries, got " +
                             std::to_string(seen) + " in " + path);

  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const std::string& path, const SparseMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("matrix_market: cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << shortest(it.value()) << "\n";
  if (!out) throw std::runtime_error("matrix_market: write failed for " + path);
}

}  // namespace parasteady
