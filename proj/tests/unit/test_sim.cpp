#include <catch_amalgamated.hpp>

#include <random>

#include "dare/error.hpp"
#include "dare/kernel.hpp"
#include "dare/sim.hpp"
#include "../common/programs.hpp"

using namespace dare;
using namespace dare::sim;
using dare::isa::Csr;
using dare::isa::Instruction;
using dare::isa::Opcode;
using dare::kernel::KernelProgram;
using dare::stats::EventKind;

namespace {

using dare::testing::finish;
using dare::testing::kData;
using dare::testing::random_program;
using dare::testing::scaffold;

SimConfig baseline() {
  SimConfig c;
  c.runahead = false;
  return c;
}

SimResult run(const KernelProgram& p, SimConfig cfg = {}, mem::LlcConfig llc = {}) {
  Simulator s(p, cfg, llc);
  return s.run();
}

void check_tentative_discipline(const SimResult& r) {
  for (const auto& rec : r.records) {
    const bool mem_op = rec.op != Opcode::Mcfg && rec.op != Opcode::Mma;
    if (!mem_op) {
      CHECK(rec.runahead_rows == 0);
      continue;
    }
    CHECK(rec.demand_rows == rec.rows);
    if (rec.op == Opcode::Mst || rec.op == Opcode::Mscatter) CHECK(rec.runahead_rows == 0);
    if (rec.tentative_sent && !rec.granted && !rec.chain_producer) CHECK(rec.runahead_rows == 1);
    if (rec.granted && !rec.preempted) CHECK(rec.runahead_rows == rec.rows);
    CHECK(rec.runahead_rows <= rec.rows);
  }
}

std::vector<std::pair<std::string, SimConfig>> variants() {
  SimConfig fre;
  SimConfig stat;
  stat.rfu = RfuMode::Static;
  SimConfig small;
  small.riq_size = 4;
  small.vmr_size = 1;
  small.lq_size = 3;
  small.sq_size = 2;
  return {{"baseline", baseline()}, {"fre", fre}, {"static", stat}, {"nvr", nvr_config()}, {"small", small}};
}

}  // namespace

TEST_CASE("empty machine advances only the cycle counter") {
  KernelProgram p = scaffold();
  Simulator s(p);
  CHECK(s.done());
  s.step();
  CHECK(s.cycle() == 1);
  CHECK(s.riq_occupancy() == 0);
  CHECK(s.ledger().cycles == 1);
  CHECK(s.ledger().llc_access == 0);
}

TEST_CASE("dispatch stalls when the RIQ is full") {
  KernelProgram p = scaffold();
  std::vector<Instruction> raw{Instruction::mld(1, kData, 64)};
  for (int i = 0; i < 40; ++i) raw.push_back(Instruction::mma(2, 0, 1));
  finish(p, raw);

  Simulator s(p, baseline());
  for (int i = 0; i < 30; ++i) s.step();
  CHECK(s.riq_occupancy() == 32);
  const auto r = s.run();
  CHECK(r.records[32].dispatch_cycle > r.records[31].dispatch_cycle);

  Simulator nvr(p, nvr_config());
  for (int i = 0; i < 30; ++i) nvr.step();
  CHECK(nvr.riq_occupancy() == 41);
}

TEST_CASE("RAW hazard blocks the mma until the load completes") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(1, kData, 64), Instruction::mma(2, 0, 1)});
  const auto r = run(p, baseline());
  CHECK(r.records[1].issue_cycle >= r.records[0].complete_cycle);
  // A cold 16-row load: 16 generated rows plus a miss each.
  CHECK(r.records[0].complete_cycle - r.records[0].issue_cycle >= 16 + 110);
}

TEST_CASE("two independent loads issue in the same cycle") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(0, kData, 64), Instruction::mld(1, kData + 4096, 64)});
  const auto r = run(p, baseline());
  CHECK(r.records[0].issue_cycle == 1);
  CHECK(r.records[1].issue_cycle == 1);
  // One row-uop generated per cycle across the LSU.
  CHECK(r.records[0].demand_rows == 16);
  CHECK(r.records[1].demand_rows == 16);
}

TEST_CASE("systolic latency and exclusivity") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mma(2, 0, 1), Instruction::mma(3, 4, 5)});
  SimConfig cfg = baseline();
  cfg.record_events = true;
  const auto r = run(p, cfg);
  CHECK(r.records[0].complete_cycle - r.records[0].issue_cycle == 96);
  CHECK(r.records[1].issue_cycle >= r.records[0].complete_cycle);
  int mmas = 0;
  for (const auto& e : r.events)
    if (e.kind == EventKind::Mma) {
      ++mmas;
      CHECK(e.value == 256);
      CHECK(e.aux == 96);
    }
  CHECK(mmas == 2);

  KernelProgram tiny = scaffold();
  finish(tiny, {Instruction::mma(2, 0, 1)}, {1, 1, 1});
  const auto t = run(tiny, cfg);
  CHECK(t.records[0].complete_cycle - t.records[0].issue_cycle == 3);
  CHECK(t.ledger.active_pe_cycles == 3);
}

TEST_CASE("a stalled load sends one tentative uop first") {
  // The second mld of m0 waits on the mma reading m0 (WAR), which waits on m1.
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(1, kData, 64), Instruction::mma(2, 0, 1), Instruction::mld(0, kData + 8192, 64)});
  SimConfig cfg;
  cfg.record_events = true;
  Simulator s(p, cfg);
  s.step();  // dispatch 0, 1
  s.step();  // issue 0, dispatch 2
  s.step();  // runahead: 2 is the only candidate
  const auto snap = s.snapshot();
  CHECK(snap["riq"][2]["tentative_sent"] == true);
  CHECK(snap["riq"][2]["granted"] == false);
  CHECK(snap["riq"][2]["decompose"] == 1);
  for (int i = 0; i < 10; ++i) s.step();
  // Still waiting for the probe, so nothing else goes out.
  CHECK(s.snapshot()["riq"][2]["decompose"] == 1);
  const auto r = s.run();
  // Cold line: classified a miss during warm-up, so the rest flowed.
  CHECK(r.records[2].granted);
  CHECK(r.records[2].runahead_rows == 16);
  CHECK(r.ledger.tentative_sent == 1);
  CHECK(r.ledger.granted == 1);
}

TEST_CASE("a probe that hits keeps the instruction filtered") {
  // The warming load fills the lines; the queue stays full of dependent mmas
  // so the final load is only dispatched after its lines are resident.
  KernelProgram p = scaffold();
  std::vector<Instruction> raw{Instruction::mld(3, kData + 8192, 64)};
  for (int i = 0; i < 33; ++i) raw.push_back(Instruction::mma(2, 3, 3));
  raw.push_back(Instruction::mma(5, 0, 3));
  raw.push_back(Instruction::mld(0, kData + 8192, 64));
  finish(p, raw);
  SimConfig cfg;
  cfg.rfu = RfuMode::Static;
  const auto r = run(p, cfg);
  const auto& last = r.records.back();
  CHECK(last.tentative_sent);
  CHECK_FALSE(last.granted);
  CHECK(last.runahead_rows == 1);
  CHECK(r.ledger.filtered == 1);
}

TEST_CASE("older candidate wins runahead arbitration") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(1, kData, 64), Instruction::mma(4, 0, 1), Instruction::mld(0, kData + 4096, 64),
             Instruction::mld(4, kData + 8192, 64)});
  Simulator s(p);
  for (int i = 0; i < 3; ++i) s.step();
  const auto snap = s.snapshot();
  CHECK(snap["riq"][2]["tentative_sent"] == true);
  CHECK(snap["riq"][3]["tentative_sent"] == false);
}

TEST_CASE("gather chain wakes its producer through the VMR") {
  KernelProgram p = scaffold(5);
  const uint64_t vec = p.base_vectors[0];
  finish(p, {Instruction::mld(1, kData, 64), Instruction::mma(2, 6, 1), Instruction::mld(6, vec, 8),
             Instruction::mma(3, 0, 1), Instruction::mgather(0, 6)});
  SimConfig cfg;
  cfg.record_events = true;
  const auto r = run(p, cfg);
  CHECK(r.records[2].chain_producer);
  CHECK(r.records[2].granted);
  CHECK(r.records[4].chain_consumer);
  CHECK(r.ledger.chain_loads >= 1);
  CHECK(r.ledger.vmr_access >= 2);
  CHECK(r.output == kernel::functional_run(p));
  CHECK_FALSE(check_issue_order(p, r.records));
}

TEST_CASE("VMR exhaustion delays chains without deadlock") {
  KernelProgram p = scaffold(6);
  std::vector<Instruction> raw{Instruction::mld(1, kData, 64)};
  for (int c = 0; c < 4; ++c) {
    raw.push_back(Instruction::mma(2, 6, 1));
    raw.push_back(Instruction::mld(6, p.base_vectors[c], 8));
    raw.push_back(Instruction::mma(3, 0, 1));
    raw.push_back(Instruction::mgather(0, 6));
  }
  finish(p, raw);
  for (uint32_t slots : {1u, 2u, 16u}) {
    SimConfig cfg;
    cfg.vmr_size = slots;
    Simulator s(p, cfg);
    while (!s.done()) {
      s.step();
      REQUIRE(s.vmr().allocated() + s.vmr().free_count() == slots);
    }
    CHECK(s.vmr().free_count() == slots);
  }
  CHECK(run(p).output == kernel::functional_run(p));
}

TEST_CASE("VMR file") {
  VmrFile v(2);
  const auto a = v.allocate(), b = v.allocate();
  REQUIRE(a);
  REQUIRE(b);
  CHECK_FALSE(v.allocate());
  isa::BaseVector x{};
  x[0] = ~uint64_t{0};
  v.write(*a, x);
  CHECK(v.read(*a)[0] == isa::kAddrMask);
  v.release(*a);
  CHECK(v.free_count() == 1);
  CHECK(v.allocate() == a);
  CHECK_THROWS_AS(VmrFile(0).release(0), Error);
  VmrFile inf(0);
  for (int i = 0; i < 100; ++i) CHECK(inf.allocate());
  CHECK(inf.allocated() == 100);
}

TEST_CASE("faults carry the instruction id") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mma(2, 0, 1), Instruction::mld(0, 0x900000, 64)});
  try {
    run(p);
    FAIL("expected a fault");
  } catch (const FaultError& f) {
    CHECK(f.instr_id() == 1);
  }
}

TEST_CASE("cycle limit is enforced") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(0, kData, 64)});
  SimConfig cfg;
  cfg.max_cycles = 10;
  CHECK_THROWS_AS(run(p, cfg), Error);
  cfg.issue_width = 0;
  CHECK_THROWS_AS(Simulator(p, cfg), ConfigError);
}

TEST_CASE("random programs: equivalence, ordering, tentative discipline, drain") {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const auto p = random_program(seed, 80);
    const auto golden = kernel::functional_run(p);
    for (const auto& [name, cfg] : variants()) {
      CAPTURE(seed, name);
      const auto r = run(p, cfg);
      CHECK(r.drained);
      CHECK(r.output == golden);
      CHECK(check_issue_order(p, r.records).value_or("") == "");
      check_tentative_discipline(r);
    }
    mem::LlcConfig oracle;
    oracle.oracle = true;
    CHECK(run(p, baseline(), oracle).output == golden);
  }
}

TEST_CASE("the order oracle notices a reordering") {
  KernelProgram p = scaffold();
  finish(p, {Instruction::mld(1, kData, 64), Instruction::mma(2, 0, 1)});
  auto r = run(p, baseline());
  REQUIRE_FALSE(check_issue_order(p, r.records));
  r.records[1].issue_cycle = r.records[0].complete_cycle - 1;
  CHECK(check_issue_order(p, r.records));
}

TEST_CASE("generated kernels match the functional run under every variant") {
  std::mt19937_64 rng(21);
  std::vector<int8_t> a(48 * 32), b(32 * 40), bs(40 * 24);
  for (auto* v : {&a, &b, &bs})
    for (auto& x : *v) x = static_cast<int8_t>(rng());
  const auto mask = sparse::synth_sparse(48, 40, 0.9, 2);
  const auto s = sparse::synth_sparse(48, 40, 0.9, 3);
  for (auto l : {kernel::Lowering::Baseline, kernel::Lowering::Gsa}) {
    const auto sd = kernel::gen_sddmm(mask, a, b, 32, l);
    const auto sp = kernel::gen_spmm(s, bs, 24, l);
    for (const auto* p : {&sd, &sp}) {
      const auto golden = kernel::functional_run(*p);
      for (const auto& [name, cfg] : variants()) {
        CAPTURE(kernel::lowering_name(l), name);
        const auto r = run(*p, cfg);
        CHECK(r.output == golden);
        CHECK(check_issue_order(*p, r.records).value_or("") == "");
        check_tentative_discipline(r);
      }
    }
  }
}

TEST_CASE("runs are deterministic and the ledger replays") {
  const auto mask = sparse::synth_sparse(64, 64, 0.9, 8);
  std::vector<int8_t> a(64 * 64, 3), b(64 * 64, -2);
  const auto p = kernel::gen_sddmm(mask, a, b, 64, kernel::Lowering::Gsa);
  SimConfig cfg;
  cfg.record_events = true;
  const auto r1 = run(p, cfg), r2 = run(p, cfg);
  CHECK(r1.cycles == r2.cycles);
  CHECK(r1.ledger == r2.ledger);
  CHECK(stats::replay(r1.events) == r1.ledger);
  CHECK(r1.ledger.cycles == r1.cycles);
}
