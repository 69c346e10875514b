#pragma once

// Sparse operands in CSC form: construction, blockification, seeded synthesis
// and Matrix Market ingestion.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dare::sparse {

class CscMatrix {
 public:
  CscMatrix() = default;
  // Validates every structural invariant; throws ConfigError on violation.
  CscMatrix(uint32_t rows, uint32_t cols, std::vector<uint32_t> colptr, std::vector<uint32_t> rowidx,
            std::vector<int8_t> values);

  static CscMatrix zeros(uint32_t rows, uint32_t cols);

  uint32_t rows() const { return rows_; }
  uint32_t cols() const { return cols_; }
  std::size_t nnz() const { return rowidx_.size(); }

  const std::vector<uint32_t>& colptr() const { return colptr_; }
  const std::vector<uint32_t>& rowidx() const { return rowidx_; }
  const std::vector<int8_t>& values() const { return values_; }

  std::span<const uint32_t> column_rows(uint32_t j) const {
    return {rowidx_.data() + colptr_[j], colptr_[j + 1] - colptr_[j]};
  }
  std::span<const int8_t> column_values(uint32_t j) const {
    return {values_.data() + colptr_[j], colptr_[j + 1] - colptr_[j]};
  }

  // Row-major dense copy; structural zeros and absent entries both read 0.
  std::vector<int8_t> to_dense() const;
  // Row-major 0/1 structure.
  std::vector<uint8_t> structure() const;

  bool structurally_equal(const CscMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && colptr_ == o.colptr_ && rowidx_ == o.rowidx_;
  }
  bool operator==(const CscMatrix&) const = default;

 private:
  uint32_t rows_ = 0;
  uint32_t cols_ = 0;
  std::vector<uint32_t> colptr_{0};
  std::vector<uint32_t> rowidx_;
  std::vector<int8_t> values_;
};

// Encodes the nonzeros of a row-major grid.
CscMatrix csc_from_dense(std::span<const int8_t> dense, uint32_t rows, uint32_t cols);

// Block edge length; a power of two in [1, 16].
struct BlockifySpec {
  uint32_t block = 1;
  bool valid() const { return block >= 1 && block <= 16 && (block & (block - 1)) == 0; }
};

// Every position of a B x B block that holds at least one nonzero becomes
// structurally nonzero. Original values are kept; filled positions carry 0.
// Blocks at the matrix edge are clipped to the original dimensions.
CscMatrix blockify(const CscMatrix& m, BlockifySpec spec);

// Each position is nonzero with probability 1 - sparsity; nonzero values are
// uniform over [-127, 127] \ {0}. Deterministic in seed on every platform.
CscMatrix synth_sparse(uint32_t rows, uint32_t cols, double sparsity, uint64_t seed);

// Coordinate-format Matrix Market (real, integer or pattern; general or
// symmetric). Pattern entries read as 1; numeric values are rounded and
// clamped to int8. Throws ParseError with a line number on malformed input,
// out-of-range indices or duplicate coordinates.
CscMatrix read_matrix_market(std::istream& in);

}  // namespace dare::sparse
