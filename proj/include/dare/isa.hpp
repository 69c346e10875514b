#pragma once

// Matrix ISA: instruction forms, CSRs, the matrix register file and the
// timing-free semantics of address generation and MMA.

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dare::isa {

inline constexpr int kNumMatrixRegs = 8;
inline constexpr uint32_t kRegRows = 16;
inline constexpr uint32_t kRegRowBytes = 64;
inline constexpr uint32_t kRegBytes = kRegRows * kRegRowBytes;
inline constexpr uint32_t kAddrBits = 48;
inline constexpr uint64_t kAddrLimit = uint64_t{1} << kAddrBits;
inline constexpr uint64_t kAddrMask = kAddrLimit - 1;
inline constexpr uint64_t kLineBytes = 64;

enum class Csr : uint8_t { M = 0, K = 1, N = 2 };

struct CsrConfig {
  uint32_t m = 16;  // rows
  uint32_t k = 64;  // bytes per row
  uint32_t n = 16;  // output columns

  bool valid() const { return m >= 1 && m <= 16 && k >= 1 && k <= 64 && n >= 1 && n <= 16; }
  auto operator<=>(const CsrConfig&) const = default;
};

// Returns cfg with one field replaced. Throws ConfigError when the value is
// outside the field's legal range.
CsrConfig apply_mcfg(CsrConfig cfg, Csr index, uint64_t value);
// Same, with the CSR given by raw index (0 = M, 1 = K, 2 = N).
CsrConfig apply_mcfg(CsrConfig cfg, uint64_t csr_index, uint64_t value);

enum class Opcode : uint8_t { Mcfg, Mld, Mst, Mma, Mgather, Mscatter };

const char* opcode_name(Opcode op);

// Bit i set = matrix register mi.
using RegMask = uint8_t;

struct Instruction {
  Opcode op = Opcode::Mcfg;
  // mld/mgather/mma destination (md).
  uint8_t rd = 0;
  // mma ms1; mgather/mscatter address register ms1.
  uint8_t rs1 = 0;
  // mma ms2; mst data register ms3; mscatter data register ms2.
  uint8_t rs2 = 0;
  // mld/mst scalar operands.
  uint64_t base = 0;
  int64_t stride = 0;
  // mcfg operands.
  Csr csr = Csr::M;
  uint64_t csr_value = 0;
  // Filled in by the decoder.
  CsrConfig shape{};
  uint64_t id = 0;

  static Instruction mcfg(Csr csr, uint64_t value);
  static Instruction mld(uint8_t md, uint64_t base, int64_t stride);
  static Instruction mst(uint8_t ms3, uint64_t base, int64_t stride);
  static Instruction mma(uint8_t md, uint8_t ms1, uint8_t ms2);
  static Instruction mgather(uint8_t md, uint8_t ms1);
  static Instruction mscatter(uint8_t ms2, uint8_t ms1);

  bool is_load() const { return op == Opcode::Mld || op == Opcode::Mgather; }
  bool is_store() const { return op == Opcode::Mst || op == Opcode::Mscatter; }
  bool is_memory() const { return is_load() || is_store(); }
  bool is_indexed() const { return op == Opcode::Mgather || op == Opcode::Mscatter; }

  RegMask reads() const;
  RegMask writes() const;

  bool operator==(const Instruction&) const = default;
};

// Stamps CSR snapshots and dispatch ids onto raw instructions in program order.
class Decoder {
 public:
  explicit Decoder(CsrConfig initial = {}) : csr_(initial) {}

  // Throws ConfigError on an illegal mcfg value or register index.
  Instruction decode(Instruction raw);

  const CsrConfig& csr() const { return csr_; }
  uint64_t next_id() const { return next_id_; }

 private:
  CsrConfig csr_;
  uint64_t next_id_ = 0;
};

class MatrixRegister {
 public:
  MatrixRegister() { bytes_.fill(0); }

  std::span<uint8_t> row(uint32_t r) { return {bytes_.data() + r * kRegRowBytes, kRegRowBytes}; }
  std::span<const uint8_t> row(uint32_t r) const {
    return {bytes_.data() + r * kRegRowBytes, kRegRowBytes};
  }
  int8_t a_elem(uint32_t r, uint32_t k) const { return static_cast<int8_t>(bytes_[r * kRegRowBytes + k]); }
  int32_t acc_elem(uint32_t r, uint32_t n) const;
  void set_acc_elem(uint32_t r, uint32_t n, int32_t v);

  std::array<uint8_t, kRegBytes>& bytes() { return bytes_; }
  const std::array<uint8_t, kRegBytes>& bytes() const { return bytes_; }

  bool operator==(const MatrixRegister&) const = default;

 private:
  std::array<uint8_t, kRegBytes> bytes_;
};

using MatrixRegisterFile = std::array<MatrixRegister, kNumMatrixRegs>;

using BaseVector = std::array<uint64_t, kRegRows>;

// [base + i*stride for i < rows]. Throws FaultError if any address leaves
// [0, 2^48).
std::vector<uint64_t> gen_strided_addresses(uint64_t base, int64_t stride, uint32_t rows);

// First `rows` lanes of the vector, masked to 48 bits. rows <= 16.
std::vector<uint64_t> gen_gather_addresses(std::span<const uint64_t> base_vector, uint32_t rows);

// Little-endian 64-bit value in the first 8 bytes of each row, masked to 48 bits.
BaseVector read_base_vector(const MatrixRegister& reg);

// Distinct 64-byte line addresses covering [addr, addr + bytes).
std::vector<uint64_t> row_lines(uint64_t addr, uint32_t bytes);

// acc[m][n] += sum_k a[m][k] * b[n][k] over the shape, wrapping int32.
// Bytes outside the M x N int32 window of acc are left untouched.
void mma_execute(MatrixRegister& acc, const MatrixRegister& a, const MatrixRegister& b, CsrConfig shape);

// Assembly text in the "mld, m0, (0x1000), 64" form.
std::string format_instruction(const Instruction& in);
// Parses one line (comments after '#' allowed). Returns false for blank lines.
// Throws ParseError tagged with line_no.
bool parse_instruction(const std::string& line, std::size_t line_no, Instruction& out);
// Parses a whole stream and decodes it from the initial CSR state.
std::vector<Instruction> parse_program(std::istream& in, CsrConfig initial = {});

}  // namespace dare::isa
