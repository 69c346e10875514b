#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "dare/error.hpp"
#include "dare/isa.hpp"

using namespace dare;
using namespace dare::isa;

TEST_CASE("apply_mcfg replaces one field") {
  CHECK(apply_mcfg(CsrConfig{16, 64, 16}, Csr::K, 32) == CsrConfig{16, 32, 16});
  CHECK(apply_mcfg(CsrConfig{1, 1, 1}, Csr::M, 1) == CsrConfig{1, 1, 1});
  CHECK_THROWS_AS(apply_mcfg(CsrConfig{}, Csr::K, 65), ConfigError);
  CHECK_THROWS_AS(apply_mcfg(CsrConfig{}, Csr::M, 0), ConfigError);
  CHECK_THROWS_AS(apply_mcfg(CsrConfig{}, Csr::N, 17), ConfigError);
  CHECK_THROWS_AS(apply_mcfg(CsrConfig{}, uint64_t{3}, 1), ConfigError);
}

TEST_CASE("decoder snapshots shape and numbers instructions") {
  Decoder d;
  auto a = d.decode(Instruction::mld(0, 0x1000, 64));
  auto c = d.decode(Instruction::mcfg(Csr::M, 4));
  auto b = d.decode(Instruction::mld(1, 0x2000, 64));
  CHECK(a.shape == CsrConfig{16, 64, 16});
  CHECK(b.shape == CsrConfig{4, 64, 16});
  CHECK(a.id == 0);
  CHECK(c.id == 1);
  CHECK(b.id == 2);
  CHECK_THROWS_AS(d.decode(Instruction::mcfg(Csr::K, 65)), ConfigError);
  CHECK_THROWS_AS(d.decode(Instruction::mld(8, 0, 0)), ConfigError);
  CHECK_THROWS_AS(d.decode(Instruction::mld(0, kAddrLimit, 0)), ConfigError);
}

TEST_CASE("strided addresses") {
  CHECK(gen_strided_addresses(0x1000, 0, 1) == std::vector<uint64_t>{0x1000});
  CHECK(gen_strided_addresses(0x1000, 0x40, 4) == std::vector<uint64_t>{0x1000, 0x1040, 0x1080, 0x10C0});
  // Scalar loop oracle for signed strides.
  std::vector<uint64_t> oracle;
  int64_t x = 0x2000;
  for (int i = 0; i < 2; ++i, x -= 0x40) oracle.push_back(static_cast<uint64_t>(x));
  CHECK(gen_strided_addresses(0x2000, -0x40, 2) == oracle);
  CHECK_THROWS_AS(gen_strided_addresses(kAddrLimit - 64, 64, 2), FaultError);
  CHECK_THROWS_AS(gen_strided_addresses(0x40, -0x80, 2), FaultError);
}

TEST_CASE("gather addresses") {
  BaseVector v{};
  v[0] = 0x100;
  v[1] = 0x900;
  v[2] = 0x500;
  CHECK(gen_gather_addresses(v, 3) == std::vector<uint64_t>{0x100, 0x900, 0x500});
  v[0] = kAddrLimit + 4;
  CHECK(gen_gather_addresses(v, 1) == std::vector<uint64_t>{(kAddrLimit + 4) % kAddrLimit});
  CHECK(gen_gather_addresses(v, 0).empty());
}

TEST_CASE("strided and gather addressing agree on uniform strides") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const uint64_t base = rng() % (uint64_t{1} << 40);
    const int64_t stride = static_cast<int64_t>(rng() % 4096) - 2048;
    const uint32_t rows = 1 + static_cast<uint32_t>(rng() % 16);
    if (base < 16 * 2048) continue;
    BaseVector v{};
    for (uint32_t i = 0; i < rows; ++i) v[i] = base + static_cast<uint64_t>(stride * static_cast<int64_t>(i));
    CHECK(gen_strided_addresses(base, stride, rows) == gen_gather_addresses(v, rows));
  }
}

TEST_CASE("base vector reads the first 8 bytes of each row") {
  MatrixRegister r;
  for (uint32_t row = 0; row < kRegRows; ++row) {
    const uint64_t v = 0xFFFF000000000000ull | (0x1000 + row * 0x40);
    for (int b = 0; b < 8; ++b) r.row(row)[b] = static_cast<uint8_t>(v >> (8 * b));
  }
  const auto bv = read_base_vector(r);
  for (uint32_t row = 0; row < kRegRows; ++row) CHECK(bv[row] == 0x1000 + row * 0x40);
}

namespace {

void fill_random(MatrixRegister& r, std::mt19937_64& rng) {
  for (auto& b : r.bytes()) b = static_cast<uint8_t>(rng());
}

}  // namespace

TEST_CASE("mma: zero annihilator and identity") {
  std::mt19937_64 rng(1);
  MatrixRegister acc, a, b;
  fill_random(b, rng);
  mma_execute(acc, a, b, {16, 64, 16});
  for (uint32_t m = 0; m < 16; ++m)
    for (uint32_t n = 0; n < 16; ++n) CHECK(acc.acc_elem(m, n) == 0);

  MatrixRegister acc2, id;
  for (uint32_t i = 0; i < 4; ++i) id.row(i)[i] = 1;
  mma_execute(acc2, id, b, {4, 4, 4});
  for (uint32_t m = 0; m < 4; ++m)
    for (uint32_t n = 0; n < 4; ++n) CHECK(acc2.acc_elem(m, n) == b.a_elem(n, m));
}

TEST_CASE("mma matches a triple loop and leaves the rest of acc untouched") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    MatrixRegister acc, a, b;
    fill_random(acc, rng);
    fill_random(a, rng);
    fill_random(b, rng);
    const CsrConfig shape{8, 8, 8};
    MatrixRegister before = acc;
    mma_execute(acc, a, b, shape);
    for (uint32_t m = 0; m < 16; ++m) {
      for (uint32_t n = 0; n < 16; ++n) {
        if (m < 8 && n < 8) {
          int64_t s = before.acc_elem(m, n);
          for (uint32_t k = 0; k < 8; ++k) s += int64_t{a.a_elem(m, k)} * b.a_elem(n, k);
          CHECK(acc.acc_elem(m, n) == static_cast<int32_t>(static_cast<uint32_t>(s)));
        } else {
          CHECK(acc.acc_elem(m, n) == before.acc_elem(m, n));
        }
      }
    }
  }
}

TEST_CASE("mma wraps on overflow") {
  MatrixRegister acc, a, b;
  acc.set_acc_elem(0, 0, INT32_MAX);
  a.row(0)[0] = 1;
  b.row(0)[0] = 1;
  mma_execute(acc, a, b, {1, 1, 1});
  CHECK(acc.acc_elem(0, 0) == INT32_MIN);
}

TEST_CASE("mma is additive in a") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    MatrixRegister acc, a1, a2, b;
    fill_random(acc, rng);
    fill_random(b, rng);
    // Keep a1 + a2 inside int8 so the sum register is exact.
    for (auto& x : a1.bytes()) x = static_cast<uint8_t>(static_cast<int8_t>(static_cast<int>(rng() % 127) - 63));
    for (auto& x : a2.bytes()) x = static_cast<uint8_t>(static_cast<int8_t>(static_cast<int>(rng() % 127) - 63));
    MatrixRegister sum;
    for (uint32_t i = 0; i < kRegBytes; ++i)
      sum.bytes()[i] = static_cast<uint8_t>(static_cast<int8_t>(a1.bytes()[i]) + static_cast<int8_t>(a2.bytes()[i]));
    const CsrConfig shape{16, 64, 16};
    MatrixRegister r1 = acc, r2 = acc, rs = acc;
    mma_execute(r1, a1, b, shape);
    mma_execute(r2, a2, b, shape);
    mma_execute(rs, sum, b, shape);
    for (uint32_t m = 0; m < 16; ++m)
      for (uint32_t n = 0; n < 16; ++n) {
        const uint32_t d1 = static_cast<uint32_t>(r1.acc_elem(m, n)) - static_cast<uint32_t>(acc.acc_elem(m, n));
        const uint32_t d2 = static_cast<uint32_t>(r2.acc_elem(m, n)) - static_cast<uint32_t>(acc.acc_elem(m, n));
        const uint32_t ds = static_cast<uint32_t>(rs.acc_elem(m, n)) - static_cast<uint32_t>(acc.acc_elem(m, n));
        CHECK(ds == d1 + d2);
      }
  }
}

TEST_CASE("mma tolerates aliasing destination and source") {
  MatrixRegisterFile regs{};
  regs[0].row(0)[0] = 2;
  regs[1].row(0)[0] = 3;
  mma_execute(regs[0], regs[0], regs[1], {1, 1, 1});
  // a(0,0) was read before the write: 2 + 2*3 in the low byte.
  CHECK(regs[0].row(0)[0] == 8);
}

TEST_CASE("row lines cover the byte range exactly") {
  CHECK(row_lines(0x1000, 64) == std::vector<uint64_t>{0x1000});
  CHECK(row_lines(0x1020, 64) == std::vector<uint64_t>{0x1000, 0x1040});
  CHECK(row_lines(0x103F, 1) == std::vector<uint64_t>{0x1000});
  CHECK(row_lines(0x1000, 0).empty());
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const uint64_t addr = rng() % 100000;
    const uint32_t k = 1 + static_cast<uint32_t>(rng() % 64);
    std::set<uint64_t> brute;
    for (uint64_t x = addr; x < addr + k; ++x) brute.insert(x / 64 * 64);
    const auto lines = row_lines(addr, k);
    CHECK(std::set<uint64_t>(lines.begin(), lines.end()) == brute);
    CHECK(lines.size() == brute.size());
  }
}

TEST_CASE("assembly text round trips") {
  const std::vector<Instruction> raw = {
      Instruction::mcfg(Csr::K, 32), Instruction::mld(0, 0x1000, 64),     Instruction::mst(3, 0x2000, -64),
      Instruction::mma(2, 0, 1),     Instruction::mgather(5, 6),          Instruction::mscatter(2, 7),
  };
  CHECK(format_instruction(raw[1]) == "mld, m0, (0x1000), 64");
  CHECK(format_instruction(raw[0]) == "mcfg, 1, 32");
  CHECK(format_instruction(raw[4]) == "mgather, m5, (m6)");
  std::ostringstream os;
  for (const auto& in : raw) os << format_instruction(in) << "\n";
  std::istringstream is(os.str());
  const auto prog = parse_program(is);
  Decoder d;
  REQUIRE(prog.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(prog[i] == d.decode(raw[i]));
}

TEST_CASE("parser accepts names, comments and reports line numbers") {
  Instruction in;
  CHECK(parse_instruction("mcfg K, 16  # shrink", 1, in));
  CHECK(in.csr == Csr::K);
  CHECK(in.csr_value == 16);
  CHECK_FALSE(parse_instruction("   # nothing", 2, in));
  std::istringstream bad("mld, m0, (0x10), 0\nmfoo, m1\n");
  try {
    parse_program(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream badcfg("mcfg, 1, 65\n");
  CHECK_THROWS_AS(parse_program(badcfg), ParseError);
}

TEST_CASE("register read/write sets") {
  CHECK(Instruction::mma(2, 0, 1).reads() == 0b111);
  CHECK(Instruction::mma(2, 0, 1).writes() == 0b100);
  CHECK(Instruction::mgather(5, 6).reads() == 0b1000000);
  CHECK(Instruction::mgather(5, 6).writes() == 0b100000);
  CHECK(Instruction::mscatter(2, 7).reads() == 0b10000100);
  CHECK(Instruction::mscatter(2, 7).writes() == 0);
  CHECK(Instruction::mst(3, 0, 0).reads() == 0b1000);
  CHECK(Instruction::mcfg(Csr::M, 1).reads() == 0);
}
