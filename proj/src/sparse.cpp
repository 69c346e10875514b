#include "dare/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "dare/error.hpp"

namespace dare::sparse {

CscMatrix::CscMatrix(uint32_t rows, uint32_t cols, std::vector<uint32_t> colptr, std::vector<uint32_t> rowidx,
                     std::vector<int8_t> values)
    : rows_(rows), cols_(cols), colptr_(std::move(colptr)), rowidx_(std::move(rowidx)), values_(std::move(values)) {
  if (colptr_.size() != static_cast<std::size_t>(cols_) + 1) throw ConfigError("CSC colptr must have cols+1 entries");
  if (colptr_.front() != 0) throw ConfigError("CSC colptr[0] must be 0");
  if (colptr_.back() != rowidx_.size()) throw ConfigError("CSC colptr[cols] must equal nnz");
  if (values_.size() != rowidx_.size()) throw ConfigError("CSC values and rowidx differ in length");
  for (uint32_t j = 0; j < cols_; ++j) {
    if (colptr_[j] > colptr_[j + 1]) throw ConfigError("CSC colptr must be non-decreasing");
    for (uint32_t p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      if (rowidx_[p] >= rows_) throw ConfigError("CSC row index out of range");
      if (p > colptr_[j] && rowidx_[p] <= rowidx_[p - 1])
        throw ConfigError("CSC row indices must strictly increase within a column");
    }
  }
}

CscMatrix CscMatrix::zeros(uint32_t rows, uint32_t cols) {
  return CscMatrix(rows, cols, std::vector<uint32_t>(cols + 1, 0), {}, {});
}

std::vector<int8_t> CscMatrix::to_dense() const {
  std::vector<int8_t> d(static_cast<std::size_t>(rows_) * cols_, 0);
  for (uint32_t j = 0; j < cols_; ++j)
    for (uint32_t p = colptr_[j]; p < colptr_[j + 1]; ++p) d[static_cast<std::size_t>(rowidx_[p]) * cols_ + j] = values_[p];
  return d;
}

std::vector<uint8_t> CscMatrix::structure() const {
  std::vector<uint8_t> d(static_cast<std::size_t>(rows_) * cols_, 0);
  for (uint32_t j = 0; j < cols_; ++j)
    for (uint32_t p = colptr_[j]; p < colptr_[j + 1]; ++p) d[static_cast<std::size_t>(rowidx_[p]) * cols_ + j] = 1;
  return d;
}

CscMatrix csc_from_dense(std::span<const int8_t> dense, uint32_t rows, uint32_t cols) {
  if (dense.size() != static_cast<std::size_t>(rows) * cols) throw ConfigError("dense grid size mismatch");
  std::vector<uint32_t> colptr{0};
  std::vector<uint32_t> rowidx;
  std::vector<int8_t> values;
  for (uint32_t j = 0; j < cols; ++j) {
    for (uint32_t i = 0; i < rows; ++i) {
      const int8_t v = dense[static_cast<std::size_t>(i) * cols + j];
      if (v != 0) {
        rowidx.push_back(i);
        values.push_back(v);
      }
    }
    colptr.push_back(static_cast<uint32_t>(rowidx.size()));
  }
  return CscMatrix(rows, cols, std::move(colptr), std::move(rowidx), std::move(values));
}

CscMatrix blockify(const CscMatrix& m, BlockifySpec spec) {
  if (!spec.valid()) throw ConfigError("block size must be a power of two in [1, 16]");
  const uint32_t b = spec.block;
  if (b == 1) return m;
  const uint32_t brows = (m.rows() + b - 1) / b;
  const uint32_t bcols = (m.cols() + b - 1) / b;
  std::vector<uint8_t> occupied(static_cast<std::size_t>(brows) * bcols, 0);
  for (uint32_t j = 0; j < m.cols(); ++j)
    for (uint32_t i : m.column_rows(j)) occupied[static_cast<std::size_t>(i / b) * bcols + j / b] = 1;

  const auto dense = m.to_dense();
  std::vector<uint32_t> colptr{0};
  std::vector<uint32_t> rowidx;
  std::vector<int8_t> values;
  for (uint32_t j = 0; j < m.cols(); ++j) {
    for (uint32_t i = 0; i < m.rows(); ++i) {
      if (occupied[static_cast<std::size_t>(i / b) * bcols + j / b]) {
        rowidx.push_back(i);
        values.push_back(dense[static_cast<std::size_t>(i) * m.cols() + j]);
      }
    }
    colptr.push_back(static_cast<uint32_t>(rowidx.size()));
  }
  return CscMatrix(m.rows(), m.cols(), std::move(colptr), std::move(rowidx), std::move(values));
}

CscMatrix synth_sparse(uint32_t rows, uint32_t cols, double sparsity, uint64_t seed) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must be in [0, 1)");
  // Raw engine output only: the standard distributions are not specified
  // bit-for-bit across library implementations.
  std::mt19937_64 rng(seed);
  const double keep = 1.0 - sparsity;
  std::vector<uint32_t> colptr{0};
  std::vector<uint32_t> rowidx;
  std::vector<int8_t> values;
  for (uint32_t j = 0; j < cols; ++j) {
    for (uint32_t i = 0; i < rows; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < keep) {
        const auto r = static_cast<int>(rng() % 254);  // 0..253
        const int v = r < 127 ? r - 127 : r - 126;     // -127..-1, 1..127
        rowidx.push_back(i);
        values.push_back(static_cast<int8_t>(v));
      }
    }
    colptr.push_back(static_cast<uint32_t>(rowidx.size()));
  }
  return CscMatrix(rows, cols, std::move(colptr), std::move(rowidx), std::move(values));
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

CscMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input, expected %%MatrixMarket header", 1);
  ++line_no;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", line_no);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", line_no);
  if (format != "coordinate") throw ParseError("only coordinate format is supported", line_no);
  if (field != "real" && field != "integer" && field != "pattern")
    throw ParseError("unsupported field '" + field + "'", line_no);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("unsupported symmetry '" + symmetry + "'", line_no);
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line, after comments.
  long long rows = -1, cols = -1, count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> count) || rows < 0 || cols < 0 || count < 0)
      throw ParseError("malformed size line", line_no);
    break;
  }
  if (rows < 0) throw ParseError("missing size line", line_no);
  if (rows > UINT32_MAX || cols > UINT32_MAX) throw ParseError("dimensions too large", line_no);

  std::map<std::pair<uint32_t, uint32_t>, int8_t> entries;  // (col, row) -> value
  auto put = [&](uint32_t r, uint32_t c, int8_t v) {
    if (!entries.emplace(std::make_pair(c, r), v).second)
      throw ParseError("duplicate coordinate (" + std::to_string(r + 1) + ", " + std::to_string(c + 1) + ")", line_no);
  };
  long long seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
    if (blank) continue;
    if (seen == count) throw ParseError("more entries than declared", line_no);
    std::istringstream ss(line);
    long long r = 0, c = 0;
    if (!(ss >> r >> c)) throw ParseError("malformed entry", line_no);
    double v = 1.0;
    if (!pattern && !(ss >> v)) throw ParseError("missing value", line_no);
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw ParseError("index (" + std::to_string(r) + ", " + std::to_string(c) + ") outside " +
                           std::to_string(rows) + "x" + std::to_string(cols),
                       line_no);
    const auto q = static_cast<int8_t>(std::clamp(std::llround(v), -127LL, 127LL));
    put(static_cast<uint32_t>(r - 1), static_cast<uint32_t>(c - 1), q);
    if (symmetric && r != c) put(static_cast<uint32_t>(c - 1), static_cast<uint32_t>(r - 1), q);
    ++seen;
  }
  if (seen != count) throw ParseError("declared " + std::to_string(count) + " entries, found " + std::to_string(seen), line_no);

  std::vector<uint32_t> colptr(static_cast<std::size_t>(cols) + 1, 0);
  std::vector<uint32_t> rowidx;
  std::vector<int8_t> values;
  for (const auto& [key, v] : entries) {
    ++colptr[key.first + 1];
    rowidx.push_back(key.second);
    values.push_back(v);
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(cols); ++j) colptr[j + 1] += colptr[j];
  return CscMatrix(static_cast<uint32_t>(rows), static_cast<uint32_t>(cols), std::move(colptr), std::move(rowidx),
                   std::move(values));
}

}  // namespace dare::sparse
