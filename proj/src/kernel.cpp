#include "dare/kernel.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "dare/error.hpp"

namespace dare::kernel {

using isa::Csr;
using isa::CsrConfig;
using isa::Instruction;
using isa::Opcode;
using json = nlohmann::ordered_json;

const char* kernel_name(KernelKind k) { return k == KernelKind::Spmm ? "spmm" : "sddmm"; }
const char* lowering_name(Lowering l) { return l == Lowering::Gsa ? "gsa" : "baseline"; }

KernelKind parse_kernel(const std::string& s) {
  if (s == "spmm" || s == "SpMM" || s == "SPMM") return KernelKind::Spmm;
  if (s == "sddmm" || s == "SDDMM") return KernelKind::Sddmm;
  throw ConfigError("unknown kernel '" + s + "'");
}

Lowering parse_lowering(const std::string& s) {
  if (s == "baseline" || s == "BASELINE") return Lowering::Baseline;
  if (s == "gsa" || s == "GSA") return Lowering::Gsa;
  throw ConfigError("unknown lowering '" + s + "'");
}

namespace {

constexpr std::array<const char*, 8> kRoleNames = {"config", "a-tile",      "b-tile",  "acc-init",
                                                    "acc-load", "base-vector", "compute", "output"};

}  // namespace

const char* role_name(Role r) { return kRoleNames[static_cast<std::size_t>(r)]; }

Role parse_role(const std::string& s) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i)
    if (s == kRoleNames[i]) return static_cast<Role>(i);
  throw ConfigError("unknown role '" + s + "'");
}

std::size_t KernelProgram::count(Role r) const { return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), r)); }

std::size_t KernelProgram::count(isa::Opcode op) const {
  return static_cast<std::size_t>(
      std::count_if(instrs.begin(), instrs.end(), [op](const Instruction& in) { return in.op == op; }));
}

std::vector<isa::BaseVector> pack_base_vectors(std::span<const uint64_t> addrs, uint32_t matrix_m) {
  if (matrix_m < 1 || matrix_m > isa::kRegRows) throw ConfigError("matrixM must be in [1, 16]");
  std::vector<isa::BaseVector> out;
  for (std::size_t i = 0; i < addrs.size(); i += matrix_m) {
    const std::size_t n = std::min<std::size_t>(matrix_m, addrs.size() - i);
    isa::BaseVector v{};
    for (std::size_t l = 0; l < isa::kRegRows; ++l) {
      const uint64_t a = addrs[i + std::min(l, n - 1)];
      if (a >= isa::kAddrLimit) throw ConfigError("base address outside the 48-bit space");
      v[l] = a;
    }
    out.push_back(v);
  }
  return out;
}

namespace {

constexpr uint64_t kRecordBytes = isa::kRegRows * 8;

std::vector<uint8_t> serialise(std::span<const isa::BaseVector> records) {
  std::vector<uint8_t> bytes(records.size() * kRecordBytes);
  for (std::size_t r = 0; r < records.size(); ++r)
    for (std::size_t l = 0; l < isa::kRegRows; ++l)
      for (int b = 0; b < 8; ++b) bytes[r * kRecordBytes + l * 8 + b] = static_cast<uint8_t>(records[r][l] >> (8 * b));
  return bytes;
}

}  // namespace

std::vector<uint64_t> place_base_vectors(MemoryImage& image, const std::string& name,
                                         std::span<const isa::BaseVector> records) {
  if (records.empty()) return {};
  const uint64_t base = image.append(name, serialise(records));
  std::vector<uint64_t> at;
  for (std::size_t r = 0; r < records.size(); ++r) at.push_back(base + r * kRecordBytes);
  return at;
}

namespace {

// A group of output rows handled by one tile. step is the uniform row
// distance for strided access (0 for a single row).
struct Pack {
  std::vector<uint32_t> rows;
  uint32_t step = 0;
  uint32_t m() const { return static_cast<uint32_t>(rows.size()); }
};

std::vector<Pack> make_packs(std::span<const uint32_t> rows, Lowering lowering, uint32_t max_m) {
  std::vector<Pack> packs;
  std::size_t i = 0;
  while (i < rows.size()) {
    Pack p;
    p.rows.push_back(rows[i]);
    std::size_t j = i + 1;
    if (lowering == Lowering::Gsa) {
      while (j < rows.size() && p.m() < max_m) p.rows.push_back(rows[j++]);
    } else if (j < rows.size() && max_m > 1) {
      p.step = rows[j] - rows[i];
      while (j < rows.size() && p.m() < max_m && rows[j] - rows[j - 1] == p.step) p.rows.push_back(rows[j++]);
    }
    packs.push_back(std::move(p));
    i = j;
  }
  return packs;
}

// Alternates between two registers so consecutive tiles of one role do not
// serialise on a WAR hazard.
struct Rotor {
  uint8_t regs[2];
  bool flip = false;
  uint8_t next() {
    flip = !flip;
    return regs[flip ? 0 : 1];
  }
};

class Emitter {
 public:
  explicit Emitter(KernelProgram& p) : p_(p), dec_(p.initial_csr) {}

  // Emits mcfg for every field that differs. n is only checked when non-zero.
  void shape(uint32_t m, uint32_t k, uint32_t n = 0) {
    if (dec_.csr().m != m) emit(Instruction::mcfg(Csr::M, m), Role::Config);
    if (dec_.csr().k != k) emit(Instruction::mcfg(Csr::K, k), Role::Config);
    if (n != 0 && dec_.csr().n != n) emit(Instruction::mcfg(Csr::N, n), Role::Config);
  }

  void emit(const Instruction& raw, Role role) {
    p_.instrs.push_back(dec_.decode(raw));
    p_.roles.push_back(role);
  }

 private:
  KernelProgram& p_;
  isa::Decoder dec_;
};

// Base-vector records are appended to a trailing segment whose base is known
// before emission starts.
class VectorTable {
 public:
  explicit VectorTable(uint64_t base) : base_(base) {}

  uint64_t add(std::span<const uint64_t> addrs, uint32_t m) {
    auto recs = pack_base_vectors(addrs, m);
    const uint64_t at = base_ + records_.size() * kRecordBytes;
    records_.insert(records_.end(), recs.begin(), recs.end());
    return at;
  }

  void finish(KernelProgram& p) {
    if (records_.empty()) return;
    p.image.insert("vec", base_, serialise(records_));
    for (std::size_t r = 0; r < records_.size(); ++r) p.base_vectors.push_back(base_ + r * kRecordBytes);
  }

 private:
  uint64_t base_;
  std::vector<isa::BaseVector> records_;
};

void check_shape(const CsrConfig& shape) {
  if (!shape.valid()) throw GenerationError("tile shape outside the legal CSR ranges");
}

const Rotor kARegs{{0, 3}};
const Rotor kBRegs{{1, 4}};
const Rotor kAccRegs{{2, 5}};
const Rotor kVecRegs{{6, 7}};

std::vector<uint8_t> as_bytes(std::span<const int8_t> v) {
  return {reinterpret_cast<const uint8_t*>(v.data()), reinterpret_cast<const uint8_t*>(v.data()) + v.size()};
}

}  // namespace

KernelProgram gen_sddmm(const sparse::CscMatrix& mask, std::span<const int8_t> a, std::span<const int8_t> b,
                        uint32_t k_dim, Lowering lowering, CsrConfig shape) {
  check_shape(shape);
  const uint32_t rows = mask.rows();
  const uint32_t cols = mask.cols();
  if (k_dim == 0) throw GenerationError("SDDMM inner dimension must be positive");
  if (a.size() != static_cast<std::size_t>(rows) * k_dim)
    throw GenerationError("A must be " + std::to_string(rows) + "x" + std::to_string(k_dim));
  if (b.size() != static_cast<std::size_t>(k_dim) * cols)
    throw GenerationError("B must be " + std::to_string(k_dim) + "x" + std::to_string(cols));

  KernelProgram p;
  p.kernel = KernelKind::Sddmm;
  p.lowering = lowering;
  p.output = {"C", rows, cols};

  std::vector<uint8_t> bt(static_cast<std::size_t>(cols) * k_dim);
  for (uint32_t k = 0; k < k_dim; ++k)
    for (uint32_t j = 0; j < cols; ++j) bt[static_cast<std::size_t>(j) * k_dim + k] = static_cast<uint8_t>(b[static_cast<std::size_t>(k) * cols + j]);
  const uint64_t a_base = p.image.append("A", as_bytes(a));
  const uint64_t bt_base = p.image.append("Bt", std::move(bt));
  const uint64_t c_base = p.image.append("C", std::vector<uint8_t>(static_cast<std::size_t>(rows) * cols * 4, 0));
  const uint64_t zero_base = p.image.append("zero", std::vector<uint8_t>(isa::kRegRowBytes, 0));
  VectorTable vecs(p.image.next_base());

  Emitter e(p);
  Rotor areg = kARegs, breg = kBRegs, accreg = kAccRegs, vecreg = kVecRegs;
  const uint32_t passes = (k_dim + shape.k - 1) / shape.k;
  auto pass_k = [&](uint32_t pass) { return std::min(shape.k, k_dim - pass * shape.k); };
  const uint64_t c_pitch = static_cast<uint64_t>(cols) * 4;

  uint32_t j0 = 0;
  while (j0 < cols) {
    // Consecutive columns with the same row structure share every A tile.
    const auto col_rows = mask.column_rows(j0);
    uint32_t j1 = j0 + 1;
    while (j1 < cols && j1 - j0 < shape.n && std::ranges::equal(mask.column_rows(j1), col_rows)) ++j1;
    const uint32_t width = j1 - j0;
    if (col_rows.empty()) {
      j0 = j1;
      continue;
    }
    const auto packs = make_packs(col_rows, lowering, shape.m);

    auto load_b = [&](uint32_t pass) {
      const uint8_t r = breg.next();
      e.shape(width, pass_k(pass));
      e.emit(Instruction::mld(r, bt_base + static_cast<uint64_t>(j0) * k_dim + pass * shape.k, k_dim), Role::BTile);
      return r;
    };
    uint8_t b_cur = passes == 1 ? load_b(0) : 0;

    for (const Pack& pk : packs) {
      const uint32_t m = pk.m();
      const uint8_t acc = accreg.next();
      e.shape(m, 4 * width);
      e.emit(Instruction::mld(acc, zero_base, 0), Role::AccInit);
      for (uint32_t pass = 0; pass < passes; ++pass) {
        if (passes > 1) b_cur = load_b(pass);
        const uint32_t kp = pass_k(pass);
        const uint8_t ar = areg.next();
        if (lowering == Lowering::Baseline) {
          e.shape(m, kp);
          e.emit(Instruction::mld(ar, a_base + static_cast<uint64_t>(pk.rows[0]) * k_dim + pass * shape.k,
                                  static_cast<int64_t>(pk.step) * k_dim),
                 Role::ATile);
        } else {
          std::vector<uint64_t> addrs;
          for (uint32_t r : pk.rows) addrs.push_back(a_base + static_cast<uint64_t>(r) * k_dim + pass * shape.k);
          const uint8_t vr = vecreg.next();
          e.shape(m, 8);
          e.emit(Instruction::mld(vr, vecs.add(addrs, m), 8), Role::BaseVector);
          e.shape(m, kp);
          e.emit(Instruction::mgather(ar, vr), Role::ATile);
        }
        e.shape(m, kp, width);
        e.emit(Instruction::mma(acc, ar, b_cur), Role::Compute);
      }
      if (lowering == Lowering::Baseline) {
        e.shape(m, 4 * width);
        e.emit(Instruction::mst(acc, c_base + pk.rows[0] * c_pitch + j0 * 4ull, static_cast<int64_t>(pk.step * c_pitch)),
               Role::Output);
      } else {
        std::vector<uint64_t> addrs;
        for (uint32_t r : pk.rows) addrs.push_back(c_base + r * c_pitch + j0 * 4ull);
        const uint8_t vr = vecreg.next();
        e.shape(m, 8);
        e.emit(Instruction::mld(vr, vecs.add(addrs, m), 8), Role::BaseVector);
        e.shape(m, 4 * width);
        e.emit(Instruction::mscatter(acc, vr), Role::Output);
      }
    }
    j0 = j1;
  }
  vecs.finish(p);
  return p;
}

KernelProgram gen_spmm(const sparse::CscMatrix& s, std::span<const int8_t> b, uint32_t n_dim, Lowering lowering,
                       CsrConfig shape) {
  check_shape(shape);
  const uint32_t rows = s.rows();
  const uint32_t k_dim = s.cols();
  if (n_dim == 0) throw GenerationError("SpMM output width must be positive");
  if (b.size() != static_cast<std::size_t>(k_dim) * n_dim)
    throw GenerationError("B must be " + std::to_string(k_dim) + "x" + std::to_string(n_dim));

  KernelProgram p;
  p.kernel = KernelKind::Spmm;
  p.lowering = lowering;
  p.output = {"C", rows, n_dim};

  // Plan every (k-tile, pack) first so the packed S values form one segment.
  struct KTile {
    uint32_t k0 = 0;
    uint32_t kt = 0;
    std::vector<Pack> packs;
    std::vector<uint64_t> sval_offsets;
  };
  const auto dense_s = s.to_dense();
  std::vector<KTile> ktiles;
  std::vector<uint8_t> svals;
  for (uint32_t k0 = 0; k0 < k_dim; k0 += shape.k) {
    KTile t;
    t.k0 = k0;
    t.kt = std::min(shape.k, k_dim - k0);
    std::vector<uint8_t> used(rows, 0);
    for (uint32_t c = k0; c < k0 + t.kt; ++c)
      for (uint32_t r : s.column_rows(c)) used[r] = 1;
    std::vector<uint32_t> need;
    for (uint32_t r = 0; r < rows; ++r)
      if (used[r]) need.push_back(r);
    if (need.empty()) continue;
    t.packs = make_packs(need, lowering, shape.m);
    for (const Pack& pk : t.packs) {
      t.sval_offsets.push_back(svals.size());
      for (uint32_t r : pk.rows)
        for (uint32_t c = k0; c < k0 + t.kt; ++c)
          svals.push_back(static_cast<uint8_t>(dense_s[static_cast<std::size_t>(r) * k_dim + c]));
    }
    ktiles.push_back(std::move(t));
  }

  std::vector<uint8_t> bt(static_cast<std::size_t>(n_dim) * k_dim);
  for (uint32_t k = 0; k < k_dim; ++k)
    for (uint32_t n = 0; n < n_dim; ++n) bt[static_cast<std::size_t>(n) * k_dim + k] = static_cast<uint8_t>(b[static_cast<std::size_t>(k) * n_dim + n]);
  const uint64_t s_base = svals.empty() ? 0 : p.image.append("S", std::move(svals));
  const uint64_t bt_base = p.image.append("Bt", std::move(bt));
  const uint64_t c_base = p.image.append("C", std::vector<uint8_t>(static_cast<std::size_t>(rows) * n_dim * 4, 0));
  VectorTable vecs(p.image.next_base());

  Emitter e(p);
  Rotor areg = kARegs, breg = kBRegs, accreg = kAccRegs, vecreg = kVecRegs;
  const uint64_t c_pitch = static_cast<uint64_t>(n_dim) * 4;

  for (const KTile& t : ktiles) {
    for (uint32_t n0 = 0; n0 < n_dim; n0 += shape.n) {
      const uint32_t nt = std::min(shape.n, n_dim - n0);
      const uint8_t br = breg.next();
      e.shape(nt, t.kt);
      e.emit(Instruction::mld(br, bt_base + static_cast<uint64_t>(n0) * k_dim + t.k0, k_dim), Role::BTile);
      for (std::size_t pi = 0; pi < t.packs.size(); ++pi) {
        const Pack& pk = t.packs[pi];
        const uint32_t m = pk.m();
        const uint8_t acc = accreg.next();
        const uint64_t c_row0 = c_base + pk.rows[0] * c_pitch + n0 * 4ull;
        const int64_t c_stride = static_cast<int64_t>(pk.step * c_pitch);
        uint8_t vr = 0;
        if (lowering == Lowering::Baseline) {
          e.shape(m, 4 * nt);
          e.emit(Instruction::mld(acc, c_row0, c_stride), Role::AccLoad);
        } else {
          std::vector<uint64_t> addrs;
          for (uint32_t r : pk.rows) addrs.push_back(c_base + r * c_pitch + n0 * 4ull);
          vr = vecreg.next();
          e.shape(m, 8);
          e.emit(Instruction::mld(vr, vecs.add(addrs, m), 8), Role::BaseVector);
          e.shape(m, 4 * nt);
          e.emit(Instruction::mgather(acc, vr), Role::AccLoad);
        }
        const uint8_t ar = areg.next();
        e.shape(m, t.kt);
        e.emit(Instruction::mld(ar, s_base + t.sval_offsets[pi], t.kt), Role::ATile);
        e.shape(m, t.kt, nt);
        e.emit(Instruction::mma(acc, ar, br), Role::Compute);
        e.shape(m, 4 * nt);
        if (lowering == Lowering::Baseline)
          e.emit(Instruction::mst(acc, c_row0, c_stride), Role::Output);
        else
          e.emit(Instruction::mscatter(acc, vr), Role::Output);
      }
    }
  }
  vecs.finish(p);
  return p;
}

void execute(const Instruction& in, isa::MatrixRegisterFile& regs, MemoryImage& mem) {
  const CsrConfig& s = in.shape;
  auto strided = [&] {
    try {
      return isa::gen_strided_addresses(in.base, in.stride, s.m);
    } catch (const FaultError& f) {
      throw FaultError(f.what(), in.id);
    }
  };
  switch (in.op) {
    case Opcode::Mcfg:
      break;
    case Opcode::Mld: {
      const auto addrs = strided();
      for (uint32_t r = 0; r < s.m; ++r) mem.read(addrs[r], regs[in.rd].row(r).first(s.k), in.id);
      break;
    }
    case Opcode::Mst: {
      const auto addrs = strided();
      for (uint32_t r = 0; r < s.m; ++r) mem.write(addrs[r], regs[in.rs2].row(r).first(s.k), in.id);
      break;
    }
    case Opcode::Mgather: {
      const auto bv = isa::read_base_vector(regs[in.rs1]);
      const auto addrs = isa::gen_gather_addresses(bv, s.m);
      for (uint32_t r = 0; r < s.m; ++r) mem.read(addrs[r], regs[in.rd].row(r).first(s.k), in.id);
      break;
    }
    case Opcode::Mscatter: {
      const auto bv = isa::read_base_vector(regs[in.rs1]);
      const auto addrs = isa::gen_gather_addresses(bv, s.m);
      for (uint32_t r = 0; r < s.m; ++r) mem.write(addrs[r], regs[in.rs2].row(r).first(s.k), in.id);
      break;
    }
    case Opcode::Mma:
      isa::mma_execute(regs[in.rd], regs[in.rs1], regs[in.rs2], s);
      break;
  }
}

MemoryImage functional_image(const KernelProgram& p) {
  MemoryImage mem = p.image;
  isa::MatrixRegisterFile regs{};
  for (const auto& in : p.instrs) execute(in, regs, mem);
  return mem;
}

std::vector<uint8_t> functional_run(const KernelProgram& p) {
  return functional_image(p).segment(p.output.region).bytes;
}

void validate(const KernelProgram& p) {
  if (p.roles.size() != p.instrs.size()) throw GenerationError("role list does not match the instruction list");
  std::array<bool, isa::kNumMatrixRegs> from_mld{};
  for (const auto& in : p.instrs) {
    if (in.is_indexed() && !from_mld[in.rs1])
      throw GenerationError("instruction " + std::to_string(in.id) + " (" + isa::opcode_name(in.op) +
                            ") uses m" + std::to_string(in.rs1) + " without a producing mld");
    const isa::RegMask w = in.writes();
    for (int r = 0; r < isa::kNumMatrixRegs; ++r)
      if (w & (1u << r)) from_mld[r] = in.op == Opcode::Mld;
  }
}

std::vector<int32_t> output_as_int32(std::span<const uint8_t> bytes) {
  std::vector<int32_t> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = static_cast<int32_t>(v);
  }
  return out;
}

namespace {

std::string to_hex(const std::vector<uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

std::vector<uint8_t> from_hex(const std::string& s) {
  if (s.size() % 2) throw ConfigError("odd-length hex payload");
  auto nib = [](char c) -> uint8_t {
    if (c >= '0' && c <= '9') return static_cast<uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<uint8_t>(c - 'A' + 10);
    throw ConfigError(std::string("bad hex digit '") + c + "'");
  };
  std::vector<uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  return out;
}

Role default_role(const Instruction& in) {
  switch (in.op) {
    case Opcode::Mcfg: return Role::Config;
    case Opcode::Mma: return Role::Compute;
    case Opcode::Mst:
    case Opcode::Mscatter: return Role::Output;
    default: return Role::ATile;
  }
}

}  // namespace

void dump_program(const KernelProgram& p, std::ostream& asm_out, json& manifest) {
  for (std::size_t i = 0; i < p.instrs.size(); ++i)
    asm_out << isa::format_instruction(p.instrs[i]) << "  # " << role_name(p.roles[i]) << '\n';

  manifest = json::object();
  manifest["kernel"] = kernel_name(p.kernel);
  manifest["lowering"] = lowering_name(p.lowering);
  manifest["initial_csr"] = {{"m", p.initial_csr.m}, {"k", p.initial_csr.k}, {"n", p.initial_csr.n}};
  manifest["instructions"] = p.instrs.size();
  const auto& out = p.image.segment(p.output.region);
  manifest["output"] = {{"region", p.output.region}, {"base", out.base}, {"rows", p.output.rows}, {"cols", p.output.cols}};
  manifest["base_vectors"] = p.base_vectors;
  json segs = json::array();
  for (const auto& [base, s] : p.image.segments())
    segs.push_back({{"name", s.name}, {"base", s.base}, {"size", s.bytes.size()}, {"data", to_hex(s.bytes)}});
  manifest["segments"] = std::move(segs);
}

KernelProgram load_program(std::istream& asm_in, const json& manifest) {
  KernelProgram p;
  try {
    p.kernel = parse_kernel(manifest.at("kernel").get<std::string>());
    p.lowering = parse_lowering(manifest.at("lowering").get<std::string>());
    const auto& c = manifest.at("initial_csr");
    p.initial_csr = {c.at("m").get<uint32_t>(), c.at("k").get<uint32_t>(), c.at("n").get<uint32_t>()};
    if (!p.initial_csr.valid()) throw ConfigError("initial CSR state is illegal");
    const auto& o = manifest.at("output");
    p.output = {o.at("region").get<std::string>(), o.at("rows").get<uint32_t>(), o.at("cols").get<uint32_t>()};
    p.base_vectors = manifest.at("base_vectors").get<std::vector<uint64_t>>();
    for (const auto& s : manifest.at("segments")) {
      auto bytes = from_hex(s.at("data").get<std::string>());
      if (bytes.size() != s.at("size").get<std::size_t>()) throw ConfigError("segment size does not match its payload");
      p.image.insert(s.at("name").get<std::string>(), s.at("base").get<uint64_t>(), std::move(bytes));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  if (!p.image.has_segment(p.output.region)) throw ConfigError("manifest output region is not a segment");

  isa::Decoder dec(p.initial_csr);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(asm_in, line)) {
    ++line_no;
    Instruction raw;
    if (!isa::parse_instruction(line, line_no, raw)) continue;
    Instruction in;
    try {
      in = dec.decode(raw);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
    Role role = default_role(in);
    if (auto hash = line.find('#'); hash != std::string::npos) {
      std::istringstream cs(line.substr(hash + 1));
      std::string tag;
      if (cs >> tag) {
        try {
          role = parse_role(tag);
        } catch (const ConfigError&) {
        }
      }
    }
    p.instrs.push_back(in);
    p.roles.push_back(role);
  }
  return p;
}

}  // namespace dare::kernel
