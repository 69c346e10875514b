#pragma once

// Banked set-associative LLC in front of a latency- and bandwidth-limited
// main memory.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <queue>
#include <unordered_map>
#include <vector>

#include "dare/stats.hpp"

namespace dare::mem {

using ReqKind = stats::AccessKind;

struct LlcConfig {
  uint64_t capacity = 2u << 20;
  uint32_t ways = 16;
  uint32_t banks = 16;
  uint32_t line_bytes = 64;
  uint32_t hit_latency = 20;
  uint32_t queue_depth = 8;  // per bank, separately for reads and writes
  bool merge_misses = false;  // attach a miss to an in-flight fill of the same line
  bool oracle = false;        // every lookup hits

  uint64_t sets() const { return capacity / (static_cast<uint64_t>(ways) * line_bytes); }
  // Throws ConfigError unless capacity = sets * ways * line and all are powers of two.
  void validate() const;
};

struct DramConfig {
  uint32_t latency = 90;
  uint32_t bytes_per_cycle = 25;

  void validate() const;
};

struct MemRequest {
  uint64_t line = 0;  // 64-byte aligned
  ReqKind kind = ReqKind::Demand;
  uint64_t uop = 0;     // caller's tag, echoed in the response
  uint64_t cookie = 0;  // second caller tag
};

struct MemResponse {
  MemRequest req;
  uint64_t submit_cycle = 0;
  uint64_t complete_cycle = 0;
  bool hit = false;
  bool redundant = false;  // prefetch to a line already resident at lookup

  uint64_t latency() const { return complete_cycle - submit_cycle; }
};

class MemSystem {
 public:
  using EventSink = std::function<void(const stats::Event&)>;

  explicit MemSystem(LlcConfig llc = {}, DramConfig dram = {}, EventSink sink = {});

  // False when the bank's queue for this request class is full; the caller
  // retries on a later cycle.
  bool submit(const MemRequest& req, uint64_t cycle);
  bool can_accept(uint64_t line, ReqKind kind) const;

  // Advances to `cycle` (strictly increasing across calls): applies fills due,
  // performs this cycle's lookups (<= 1 read and 1 write per bank) and returns
  // every response completing at or before `cycle`, in completion order.
  std::vector<MemResponse> tick(uint64_t cycle);

  bool resident(uint64_t line) const;
  // Nothing queued, in flight or awaiting delivery.
  bool idle() const;
  std::size_t pending() const;

  uint32_t bank_of(uint64_t line) const { return static_cast<uint32_t>((line / llc_.line_bytes) % llc_.banks); }
  uint64_t set_of(uint64_t line) const { return (line / llc_.line_bytes) % sets_; }

  const LlcConfig& llc() const { return llc_; }
  const DramConfig& dram() const { return dram_; }

  // One CSV line per response: cycle,address,kind,hit/miss,latency.
  void enable_trace(std::ostream* out);

 private:
  struct Waiting {
    MemRequest req;
    uint64_t submit_cycle;
  };
  struct Bank {
    std::deque<Waiting> reads;
    std::deque<Waiting> writes;
  };
  struct Way {
    uint64_t tag = 0;
    uint64_t stamp = 0;
    bool valid = false;
  };
  struct Pending {
    uint64_t when;
    uint64_t seq;
    bool fill;  // a DRAM fill (no response) rather than a response
    MemResponse resp;
    bool operator>(const Pending& o) const { return when != o.when ? when > o.when : seq > o.seq; }
  };

  void lookup(const Waiting& w, uint64_t cycle);
  void touch(uint64_t line, uint64_t cycle);
  void install(uint64_t line, uint64_t cycle);
  uint64_t dram_complete(uint64_t request_cycle);
  void emit(const stats::Event& e) const {
    if (sink_) sink_(e);
  }

  LlcConfig llc_;
  DramConfig dram_;
  EventSink sink_;
  uint64_t sets_;
  std::vector<Bank> banks_;
  std::vector<Way> ways_;  // sets_ * ways, row-major by set
  // Earliest start of the next DRAM transfer, in 1/bytes_per_cycle cycles.
  uint64_t dram_free_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> events_;
  std::unordered_map<uint64_t, uint64_t> inflight_;  // line -> fill cycle, for merging
  uint64_t seq_ = 0;
  uint64_t last_cycle_ = 0;
  bool ticked_ = false;
  std::ostream* trace_ = nullptr;
};

}  // namespace dare::mem
