#pragma once

// Lowers SpMM and SDDMM over CSC operands into matrix instruction streams
// plus the memory image they run against.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dare/isa.hpp"
#include "dare/memory_image.hpp"
#include "dare/sparse.hpp"

namespace dare::kernel {

enum class KernelKind : uint8_t { Spmm, Sddmm };
enum class Lowering : uint8_t { Baseline, Gsa };

const char* kernel_name(KernelKind k);
const char* lowering_name(Lowering l);
KernelKind parse_kernel(const std::string& s);
Lowering parse_lowering(const std::string& s);

// What each emitted instruction is for. Only used for accounting and tests.
enum class Role : uint8_t {
  Config,      // mcfg
  ATile,       // sparse-side operand tile (A rows for SDDMM, S values for SpMM)
  BTile,       // dense operand tile
  AccInit,     // zero the accumulator
  AccLoad,     // read back partial output
  BaseVector,  // mld of a base-address vector
  Compute,     // mma
  Output,      // mst / mscatter of results
};

const char* role_name(Role r);
Role parse_role(const std::string& s);

// Output region is an int32 row-major rows x cols grid.
struct OutputDescriptor {
  std::string region = "C";
  uint32_t rows = 0;
  uint32_t cols = 0;
  bool operator==(const OutputDescriptor&) const = default;
};

struct KernelProgram {
  KernelKind kernel = KernelKind::Sddmm;
  Lowering lowering = Lowering::Baseline;
  isa::CsrConfig initial_csr{};
  std::vector<isa::Instruction> instrs;  // decoded, dispatch order
  std::vector<Role> roles;               // parallel to instrs
  MemoryImage image;
  OutputDescriptor output;
  std::vector<uint64_t> base_vectors;  // address of every base-vector record

  std::size_t count(Role r) const;
  std::size_t count(isa::Opcode op) const;
  bool operator==(const KernelProgram&) const = default;
};

// Dense operands are row-major. SDDMM: mask is M x N, A is M x K, B is K x N.
// shape bounds the tiles: rows per tile (m), reduction bytes per pass (k) and
// output columns per tile (n). Throws GenerationError on inconsistent input.
KernelProgram gen_sddmm(const sparse::CscMatrix& mask, std::span<const int8_t> a, std::span<const int8_t> b,
                        uint32_t k_dim, Lowering lowering, isa::CsrConfig shape = {});

// S is M x K sparse, B is K x N dense; the output is C = S * B (M x N).
KernelProgram gen_spmm(const sparse::CscMatrix& s, std::span<const int8_t> b, uint32_t n_dim, Lowering lowering,
                       isa::CsrConfig shape = {});

// Chunks addresses into records of at most matrix_m lanes. Unused lanes repeat
// the last valid address of the record.
std::vector<isa::BaseVector> pack_base_vectors(std::span<const uint64_t> addrs, uint32_t matrix_m);

// Serialises records into a segment (128 bytes each, 8 bytes per lane, little
// endian) and returns the address of every record.
std::vector<uint64_t> place_base_vectors(MemoryImage& image, const std::string& name,
                                         std::span<const isa::BaseVector> records);

// Architectural effect of one instruction on registers and memory.
void execute(const isa::Instruction& in, isa::MatrixRegisterFile& regs, MemoryImage& mem);

// Golden in-order executor. Returns the final image.
MemoryImage functional_image(const KernelProgram& p);
// Output region bytes after a functional run.
std::vector<uint8_t> functional_run(const KernelProgram& p);

// Every mgather/mscatter address register must come from an earlier mld with
// no intervening write. Throws GenerationError naming the offender.
void validate(const KernelProgram& p);

// Int32 view of an output region.
std::vector<int32_t> output_as_int32(std::span<const uint8_t> bytes);

// Text + manifest form; load(dump(p)) == p.
void dump_program(const KernelProgram& p, std::ostream& asm_out, nlohmann::ordered_json& manifest);
KernelProgram load_program(std::istream& asm_in, const nlohmann::ordered_json& manifest);

}  // namespace dare::kernel
