#pragma once

// Cycle-level model of the matrix unit: dispatch into the runahead issue
// queue, scoreboarded out-of-order issue, row-granular LSU, systolic array,
// and the runahead path (DMU chains, VMR, filter unit).

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include <json.hpp>

#include "dare/classifier.hpp"
#include "dare/kernel.hpp"
#include "dare/memsys.hpp"
#include "dare/stats.hpp"

namespace dare::sim {

enum class RfuMode : uint8_t { Dynamic, Static, Off };
const char* rfu_mode_name(RfuMode m);

struct SimConfig {
  bool runahead = true;     // false: plain MPU without RIQ prefetching, RFU or VMR
  uint32_t riq_size = 32;   // 0 = unbounded
  uint32_t vmr_size = 16;   // 0 = unbounded
  RfuMode rfu = RfuMode::Dynamic;
  uint32_t static_threshold = 64;
  bool prefetch_bypass_lq = false;  // NVR emulation
  bool classifier_prefetch_samples = true;
  ClassifierConfig classifier{};

  uint32_t dispatch_width = 2;
  uint32_t issue_width = 2;
  uint32_t issue_scope = 32;  // oldest entries the issue logic can see
  uint32_t prefetch_width = 1;
  uint32_t lq_size = 48;      // row-uops
  uint32_t sq_size = 48;
  uint32_t systolic_dim = 16;
  uint32_t mcfg_latency = 1;

  uint64_t max_cycles = 50'000'000;
  bool record_events = false;
  std::ostream* mem_trace = nullptr;  // LLC request/response CSV, when set

  void validate() const;
};

// NVR emulation: unbounded RIQ and VMR, no filtering, prefetches outside the LQ.
SimConfig nvr_config(SimConfig base = {});

enum class ChainRole : uint8_t { None, Producer, Consumer };
enum class UopKind : uint8_t { Demand, Tentative, Prefetch, ChainLoad, Store };
const char* uop_kind_name(UopKind k);

// Per-instruction accounting, kept after the instruction leaves the queue.
struct InstrRecord {
  uint64_t id = 0;
  isa::Opcode op = isa::Opcode::Mcfg;
  uint32_t rows = 0;  // matrixM for memory instructions
  bool tentative_sent = false;
  bool granted = false;
  bool chain_producer = false;
  bool chain_consumer = false;
  bool preempted = false;  // issued while granted runahead rows were outstanding
  uint32_t runahead_rows = 0;
  uint32_t runahead_lines = 0;
  uint32_t demand_rows = 0;
  uint32_t demand_lines = 0;
  uint64_t dispatch_cycle = 0;
  uint64_t issue_cycle = 0;
  uint64_t complete_cycle = 0;
};

class VmrFile {
 public:
  explicit VmrFile(uint32_t entries);  // 0 = unbounded
  std::optional<uint32_t> allocate();
  void release(uint32_t slot);
  bool unbounded() const { return entries_ == 0; }
  uint32_t capacity() const { return entries_; }
  std::size_t free_count() const { return free_.size(); }
  std::size_t allocated() const { return allocated_; }
  const std::deque<uint32_t>& free_list() const { return free_; }
  // Lanes are 48 bits wide.
  void write(uint32_t slot, const isa::BaseVector& v);
  const isa::BaseVector& read(uint32_t slot) const;

 private:
  uint32_t entries_;
  std::deque<uint32_t> free_;
  std::size_t allocated_ = 0;
  uint32_t next_unbounded_ = 0;
  std::map<uint32_t, isa::BaseVector> data_;
};

struct SimResult {
  uint64_t cycles = 0;
  stats::StatLedger ledger;
  std::vector<stats::Event> events;  // only with record_events
  std::vector<InstrRecord> records;
  kernel::MemoryImage image;         // final memory
  std::vector<uint8_t> output;       // output region bytes
  bool drained = false;
};

class Simulator {
 public:
  Simulator(const kernel::KernelProgram& program, SimConfig cfg = {}, mem::LlcConfig llc = {},
            mem::DramConfig dram = {});

  // Advances one cycle.
  void step();
  bool done() const;
  // Runs to completion; throws Error if max_cycles is exceeded.
  SimResult run();

  uint64_t cycle() const { return cycle_; }
  const stats::StatLedger& ledger() const { return ledger_; }
  const LatencyClassifier& classifier() const { return classifier_; }
  const VmrFile& vmr() const { return vmr_; }
  std::size_t riq_occupancy() const { return window_.size(); }
  nlohmann::ordered_json snapshot() const;

 private:
  struct Entry {
    isa::Instruction in;
    enum class State : uint8_t { Waiting, Issued, Done } state = State::Waiting;
    // Runahead.
    uint32_t ra_next = 0;  // decompose counter
    bool tentative_sent = false;
    bool tentative_resolved = false;
    bool granted = false;
    ChainRole role = ChainRole::None;
    std::optional<uint32_t> vmr;  // slot this producer writes
    uint32_t ra_rows_done = 0;
    bool vmr_ready = false;
    uint32_t vmr_readers = 0;
    std::optional<uint64_t> producer;  // chain producer feeding this consumer
    bool reading_vmr = false;
    std::vector<uint64_t> ra_addrs;  // per-row runahead addresses once known
    // Demand side.
    std::vector<uint64_t> addrs;  // per-row addresses, fixed at issue
    uint32_t dem_next = 0;
    uint32_t dem_done = 0;
    std::vector<uint64_t> footprint;  // sorted lines, when known
    bool footprint_known = false;
  };

  struct RowUop {
    uint64_t instr;
    uint32_t row;
    UopKind kind;
    uint32_t lines_left;
    uint64_t start;
    bool holds_lq;
    bool holds_sq;
  };

  struct Outbound {
    mem::MemRequest req;
  };

  Entry* find(uint64_t id);
  const Entry* find(uint64_t id) const;
  InstrRecord& record(uint64_t id) { return records_[id]; }

  void emit(const stats::Event& e);
  void process_responses();
  void process_timed_completions();
  void complete_instruction(Entry& e);
  void retire();
  void issue();
  bool can_issue(const Entry& e, bool mma_taken) const;
  bool memory_conflict(const Entry& e) const;
  void start_execution(Entry& e);
  void generate_demand();
  void runahead();
  bool runahead_candidate(Entry& e);
  bool resolve_runahead_addresses(Entry& e);
  bool send_runahead_uop(Entry& e);
  void release_consumer(Entry& consumer);
  void release_producer_vmr(Entry& producer);
  void fill_vmr(Entry& producer);
  void dispatch();
  void submit_outbound();
  std::optional<uint64_t> pending_writer(uint8_t reg, uint64_t before) const;
  void check_drained() const;

  const kernel::KernelProgram& program_;
  SimConfig cfg_;
  std::vector<stats::Event> events_;
  stats::StatLedger ledger_;
  mem::MemSystem mem_;
  LatencyClassifier classifier_;
  VmrFile vmr_;

  isa::MatrixRegisterFile regs_{};
  kernel::MemoryImage image_;

  uint64_t cycle_ = 0;
  std::size_t next_dispatch_ = 0;
  std::deque<Entry> window_;
  std::vector<InstrRecord> records_;

  // Uncompleted readers/writers per matrix register, by instruction id.
  std::array<std::set<uint64_t>, isa::kNumMatrixRegs> sb_writers_;
  std::array<std::set<uint64_t>, isa::kNumMatrixRegs> sb_readers_;
  std::set<uint64_t> pending_mcfg_;

  uint64_t systolic_free_at_ = 0;
  std::priority_queue<std::pair<uint64_t, uint64_t>, std::vector<std::pair<uint64_t, uint64_t>>, std::greater<>>
      timed_;  // (completion cycle, instruction id)

  std::map<uint64_t, RowUop> uops_;
  uint64_t next_uop_ = 0;
  std::deque<Outbound> outbound_;
  uint32_t lq_used_ = 0;
  uint32_t sq_used_ = 0;
  std::vector<mem::MemResponse> inbox_;
};

// Scoreboard and ordering oracle: replays the records of a run in program
// order and returns a description of the first violation, if any.
std::optional<std::string> check_issue_order(const kernel::KernelProgram& p, const std::vector<InstrRecord>& records);

}  // namespace dare::sim
