#include "dare/isa.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <istream>
#include <sstream>

#include "dare/error.hpp"

namespace dare::isa {

CsrConfig apply_mcfg(CsrConfig cfg, Csr index, uint64_t value) {
  const uint64_t hi = index == Csr::K ? 64 : 16;
  if (value < 1 || value > hi) {
    static const char* names[] = {"matrixM", "matrixK", "matrixN"};
    throw ConfigError(std::string(names[static_cast<int>(index)]) + " value " + std::to_string(value) +
                      " outside [1, " + std::to_string(hi) + "]");
  }
  switch (index) {
    case Csr::M: cfg.m = static_cast<uint32_t>(value); break;
    case Csr::K: cfg.k = static_cast<uint32_t>(value); break;
    case Csr::N: cfg.n = static_cast<uint32_t>(value); break;
  }
  return cfg;
}

CsrConfig apply_mcfg(CsrConfig cfg, uint64_t csr_index, uint64_t value) {
  if (csr_index > 2) throw ConfigError("CSR index " + std::to_string(csr_index) + " is not M, K or N");
  return apply_mcfg(cfg, static_cast<Csr>(csr_index), value);
}

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Mcfg: return "mcfg";
    case Opcode::Mld: return "mld";
    case Opcode::Mst: return "mst";
    case Opcode::Mma: return "mma";
    case Opcode::Mgather: return "mgather";
    case Opcode::Mscatter: return "mscatter";
  }
  return "?";
}

Instruction Instruction::mcfg(Csr csr, uint64_t value) {
  Instruction in;
  in.op = Opcode::Mcfg;
  in.csr = csr;
  in.csr_value = value;
  return in;
}

Instruction Instruction::mld(uint8_t md, uint64_t base, int64_t stride) {
  Instruction in;
  in.op = Opcode::Mld;
  in.rd = md;
  in.base = base;
  in.stride = stride;
  return in;
}

Instruction Instruction::mst(uint8_t ms3, uint64_t base, int64_t stride) {
  Instruction in;
  in.op = Opcode::Mst;
  in.rs2 = ms3;
  in.base = base;
  in.stride = stride;
  return in;
}

Instruction Instruction::mma(uint8_t md, uint8_t ms1, uint8_t ms2) {
  Instruction in;
  in.op = Opcode::Mma;
  in.rd = md;
  in.rs1 = ms1;
  in.rs2 = ms2;
  return in;
}

Instruction Instruction::mgather(uint8_t md, uint8_t ms1) {
  Instruction in;
  in.op = Opcode::Mgather;
  in.rd = md;
  in.rs1 = ms1;
  return in;
}

Instruction Instruction::mscatter(uint8_t ms2, uint8_t ms1) {
  Instruction in;
  in.op = Opcode::Mscatter;
  in.rs2 = ms2;
  in.rs1 = ms1;
  return in;
}

RegMask Instruction::reads() const {
  auto bit = [](uint8_t r) { return static_cast<RegMask>(1u << r); };
  switch (op) {
    case Opcode::Mst: return bit(rs2);
    case Opcode::Mma: return bit(rd) | bit(rs1) | bit(rs2);
    case Opcode::Mgather: return bit(rs1);
    case Opcode::Mscatter: return bit(rs1) | bit(rs2);
    default: return 0;
  }
}

RegMask Instruction::writes() const {
  switch (op) {
    case Opcode::Mld:
    case Opcode::Mma:
    case Opcode::Mgather: return static_cast<RegMask>(1u << rd);
    default: return 0;
  }
}

Instruction Decoder::decode(Instruction raw) {
  if (raw.rd >= kNumMatrixRegs || raw.rs1 >= kNumMatrixRegs || raw.rs2 >= kNumMatrixRegs)
    throw ConfigError("matrix register index out of range");
  if (raw.op == Opcode::Mcfg) csr_ = apply_mcfg(csr_, raw.csr, raw.csr_value);
  if ((raw.op == Opcode::Mld || raw.op == Opcode::Mst) && raw.base >= kAddrLimit)
    throw ConfigError("base address exceeds 48 bits");
  raw.shape = csr_;
  raw.id = next_id_++;
  return raw;
}

int32_t MatrixRegister::acc_elem(uint32_t r, uint32_t n) const {
  uint32_t u;
  std::memcpy(&u, bytes_.data() + r * kRegRowBytes + 4 * n, 4);
  return static_cast<int32_t>(u);
}

void MatrixRegister::set_acc_elem(uint32_t r, uint32_t n, int32_t v) {
  const auto u = static_cast<uint32_t>(v);
  std::memcpy(bytes_.data() + r * kRegRowBytes + 4 * n, &u, 4);
}

std::vector<uint64_t> gen_strided_addresses(uint64_t base, int64_t stride, uint32_t rows) {
  std::vector<uint64_t> out;
  out.reserve(rows);
  for (uint32_t i = 0; i < rows; ++i) {
    // Signed 128-bit so a negative stride below zero is caught rather than wrapped.
    const __int128 a = static_cast<__int128>(base) + static_cast<__int128>(stride) * i;
    if (a < 0 || a >= static_cast<__int128>(kAddrLimit))
      throw FaultError("strided address out of the 48-bit space at row " + std::to_string(i));
    out.push_back(static_cast<uint64_t>(a));
  }
  return out;
}

std::vector<uint64_t> gen_gather_addresses(std::span<const uint64_t> base_vector, uint32_t rows) {
  rows = std::min<uint32_t>(rows, static_cast<uint32_t>(base_vector.size()));
  std::vector<uint64_t> out(rows);
  for (uint32_t i = 0; i < rows; ++i) out[i] = base_vector[i] & kAddrMask;
  return out;
}

BaseVector read_base_vector(const MatrixRegister& reg) {
  BaseVector v{};
  for (uint32_t r = 0; r < kRegRows; ++r) {
    uint64_t x;
    std::memcpy(&x, reg.row(r).data(), 8);
    v[r] = x & kAddrMask;
  }
  return v;
}

std::vector<uint64_t> row_lines(uint64_t addr, uint32_t bytes) {
  std::vector<uint64_t> lines;
  if (bytes == 0) return lines;
  const uint64_t first = addr & ~(kLineBytes - 1);
  const uint64_t last = (addr + bytes - 1) & ~(kLineBytes - 1);
  for (uint64_t l = first; l <= last; l += kLineBytes) lines.push_back(l);
  return lines;
}

void mma_execute(MatrixRegister& acc, const MatrixRegister& a, const MatrixRegister& b, CsrConfig shape) {
  // md may alias a source register; compute from copies.
  const MatrixRegister a_in = a;
  const MatrixRegister b_in = b;
  for (uint32_t m = 0; m < shape.m; ++m) {
    for (uint32_t n = 0; n < shape.n; ++n) {
      uint32_t sum = static_cast<uint32_t>(acc.acc_elem(m, n));
      for (uint32_t k = 0; k < shape.k; ++k)
        sum += static_cast<uint32_t>(int32_t{a_in.a_elem(m, k)} * int32_t{b_in.a_elem(n, k)});
      acc.set_acc_elem(m, n, static_cast<int32_t>(sum));
    }
  }
}

namespace {

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

uint8_t parse_reg(const std::string& tok, std::size_t line_no) {
  const std::string t = trim(tok);
  if (t.size() != 2 || t[0] != 'm' || t[1] < '0' || t[1] > '7')
    throw ParseError("expected matrix register m0..m7, got '" + t + "'", line_no);
  return static_cast<uint8_t>(t[1] - '0');
}

std::string strip_parens(const std::string& tok, std::size_t line_no) {
  const std::string t = trim(tok);
  if (t.size() < 3 || t.front() != '(' || t.back() != ')')
    throw ParseError("expected parenthesised operand, got '" + t + "'", line_no);
  return trim(t.substr(1, t.size() - 2));
}

int64_t parse_int(const std::string& tok, std::size_t line_no) {
  const std::string t = trim(tok);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used, 0);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected integer, got '" + t + "'", line_no);
  }
}

uint64_t parse_uint(const std::string& tok, std::size_t line_no) {
  const std::string t = trim(tok);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(t, &used, 0);
    if (used != t.size() || (!t.empty() && t[0] == '-')) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected unsigned integer, got '" + t + "'", line_no);
  }
}

Csr parse_csr(const std::string& tok, std::size_t line_no) {
  const std::string t = trim(tok);
  if (t == "matrixM" || t == "M") return Csr::M;
  if (t == "matrixK" || t == "K") return Csr::K;
  if (t == "matrixN" || t == "N") return Csr::N;
  const uint64_t v = parse_uint(t, line_no);
  if (v > 2) throw ParseError("CSR index " + t + " is not M, K or N", line_no);
  return static_cast<Csr>(v);
}

}  // namespace

std::string format_instruction(const Instruction& in) {
  switch (in.op) {
    case Opcode::Mcfg:
      return "mcfg, " + std::to_string(static_cast<int>(in.csr)) + ", " + std::to_string(in.csr_value);
    case Opcode::Mld:
      return "mld, m" + std::to_string(in.rd) + ", (" + hex(in.base) + "), " + std::to_string(in.stride);
    case Opcode::Mst:
      return "mst, m" + std::to_string(in.rs2) + ", (" + hex(in.base) + "), " + std::to_string(in.stride);
    case Opcode::Mma:
      return "mma, m" + std::to_string(in.rd) + ", m" + std::to_string(in.rs1) + ", m" + std::to_string(in.rs2);
    case Opcode::Mgather:
      return "mgather, m" + std::to_string(in.rd) + ", (m" + std::to_string(in.rs1) + ")";
    case Opcode::Mscatter:
      return "mscatter, m" + std::to_string(in.rs2) + ", (m" + std::to_string(in.rs1) + ")";
  }
  return {};
}

bool parse_instruction(const std::string& raw_line, std::size_t line_no, Instruction& out) {
  std::string line = raw_line;
  if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  line = trim(line);
  if (line.empty()) return false;

  // Mnemonic ends at the first comma or whitespace; the comma after it is optional.
  std::size_t cut = 0;
  while (cut < line.size() && line[cut] != ',' && !std::isspace(static_cast<unsigned char>(line[cut]))) ++cut;
  const std::string mnem = line.substr(0, cut);
  std::string rest = trim(line.substr(cut));
  if (!rest.empty() && rest.front() == ',') rest = trim(rest.substr(1));

  std::vector<std::string> ops;
  {
    std::string cur;
    int depth = 0;
    for (char c : rest) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) {
        ops.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty() || !ops.empty()) ops.push_back(trim(cur));
  }

  auto need = [&](std::size_t n) {
    if (ops.size() != n)
      throw ParseError(mnem + " takes " + std::to_string(n) + " operands, got " + std::to_string(ops.size()),
                       line_no);
  };

  if (mnem == "mcfg") {
    need(2);
    out = Instruction::mcfg(parse_csr(ops[0], line_no), parse_uint(ops[1], line_no));
  } else if (mnem == "mld" || mnem == "mst") {
    need(3);
    const uint8_t r = parse_reg(ops[0], line_no);
    const uint64_t base = parse_uint(strip_parens(ops[1], line_no), line_no);
    const int64_t stride = parse_int(ops[2], line_no);
    out = mnem == "mld" ? Instruction::mld(r, base, stride) : Instruction::mst(r, base, stride);
  } else if (mnem == "mma") {
    need(3);
    out = Instruction::mma(parse_reg(ops[0], line_no), parse_reg(ops[1], line_no), parse_reg(ops[2], line_no));
  } else if (mnem == "mgather" || mnem == "mscatter") {
    need(2);
    const uint8_t r = parse_reg(ops[0], line_no);
    const uint8_t a = parse_reg(strip_parens(ops[1], line_no), line_no);
    out = mnem == "mgather" ? Instruction::mgather(r, a) : Instruction::mscatter(r, a);
  } else {
    throw ParseError("unknown mnemonic '" + mnem + "'", line_no);
  }
  return true;
}

std::vector<Instruction> parse_program(std::istream& in, CsrConfig initial) {
  Decoder dec(initial);
  std::vector<Instruction> prog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Instruction raw;
    if (!parse_instruction(line, line_no, raw)) continue;
    try {
      prog.push_back(dec.decode(raw));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return prog;
}

}  // namespace dare::isa
