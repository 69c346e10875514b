#include "dare/memsys.hpp"

#include <algorithm>
#include <ostream>

#include "dare/error.hpp"

namespace dare::mem {

namespace {

bool pow2(uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace

void LlcConfig::validate() const {
  if (!pow2(capacity) || !pow2(ways) || !pow2(banks) || !pow2(line_bytes))
    throw ConfigError("LLC capacity, ways, banks and line size must be powers of two");
  if (capacity < static_cast<uint64_t>(ways) * line_bytes) throw ConfigError("LLC capacity below one set");
  if (sets() * ways * line_bytes != capacity) throw ConfigError("LLC capacity must equal sets * ways * line");
  if (hit_latency == 0) throw ConfigError("LLC hit latency must be positive");
  if (queue_depth == 0) throw ConfigError("LLC bank queue depth must be positive");
}

void DramConfig::validate() const {
  if (bytes_per_cycle == 0) throw ConfigError("DRAM bandwidth must be positive");
}

MemSystem::MemSystem(LlcConfig llc, DramConfig dram, EventSink sink)
    : llc_(llc), dram_(dram), sink_(std::move(sink)) {
  llc_.validate();
  dram_.validate();
  sets_ = llc_.sets();
  banks_.resize(llc_.banks);
  ways_.resize(sets_ * llc_.ways);
}

void MemSystem::enable_trace(std::ostream* out) {
  trace_ = out;
  if (trace_) *trace_ << "cycle,address,kind,result,latency\n";
}

bool MemSystem::can_accept(uint64_t line, ReqKind kind) const {
  const Bank& b = banks_[bank_of(line)];
  return (kind == ReqKind::Store ? b.writes.size() : b.reads.size()) < llc_.queue_depth;
}

bool MemSystem::submit(const MemRequest& req, uint64_t cycle) {
  if (req.line % llc_.line_bytes != 0) throw Error("memory request address is not line aligned");
  if (!can_accept(req.line, req.kind)) return false;
  Bank& b = banks_[bank_of(req.line)];
  (req.kind == ReqKind::Store ? b.writes : b.reads).push_back({req, cycle});
  return true;
}

bool MemSystem::resident(uint64_t line) const {
  const uint64_t set = set_of(line);
  const uint64_t tag = line / llc_.line_bytes;
  for (uint32_t w = 0; w < llc_.ways; ++w) {
    const Way& way = ways_[set * llc_.ways + w];
    if (way.valid && way.tag == tag) return true;
  }
  return false;
}

void MemSystem::touch(uint64_t line, uint64_t cycle) {
  const uint64_t set = set_of(line);
  const uint64_t tag = line / llc_.line_bytes;
  for (uint32_t w = 0; w < llc_.ways; ++w) {
    Way& way = ways_[set * llc_.ways + w];
    if (way.valid && way.tag == tag) {
      way.stamp = cycle;
      return;
    }
  }
}

void MemSystem::install(uint64_t line, uint64_t cycle) {
  if (resident(line)) {
    touch(line, cycle);
    return;
  }
  const uint64_t set = set_of(line);
  Way* victim = &ways_[set * llc_.ways];
  for (uint32_t w = 0; w < llc_.ways; ++w) {
    Way& way = ways_[set * llc_.ways + w];
    if (!way.valid) {
      victim = &way;
      break;
    }
    if (way.stamp < victim->stamp) victim = &way;
  }
  *victim = {line / llc_.line_bytes, cycle, true};
}

uint64_t MemSystem::dram_complete(uint64_t request_cycle) {
  // Token bucket in units of 1/bytes_per_cycle cycles: each line occupies
  // the channel for line_bytes units.
  const uint64_t bpc = dram_.bytes_per_cycle;
  const uint64_t now = request_cycle * bpc;
  const uint64_t start = std::max(now, dram_free_);
  dram_free_ = start + llc_.line_bytes;
  const uint64_t delay = start - now;
  return request_cycle + dram_.latency + (delay + bpc - 1) / bpc;
}

void MemSystem::lookup(const Waiting& w, uint64_t cycle) {
  MemResponse r{w.req, w.submit_cycle, cycle + llc_.hit_latency, false, false};
  const uint64_t line = w.req.line;
  bool fill = false;
  if (llc_.oracle) {
    r.hit = true;
  } else if (resident(line)) {
    touch(line, cycle);
    r.hit = true;
    r.redundant = w.req.kind == ReqKind::Prefetch;
  } else if (w.req.kind == ReqKind::Store) {
    install(line, cycle);  // write-validate: no fetch for a full-line store
  } else if (auto it = inflight_.find(line); llc_.merge_misses && it != inflight_.end()) {
    r.complete_cycle = std::max(r.complete_cycle, it->second);
  } else {
    r.complete_cycle = dram_complete(cycle + llc_.hit_latency);
    inflight_[line] = r.complete_cycle;
    fill = true;
    emit({stats::EventKind::DramAccess});
  }
  emit({stats::EventKind::LlcLookup, w.req.kind, r.hit, r.redundant});
  events_.push({r.complete_cycle, seq_++, fill, r});
}

std::vector<MemResponse> MemSystem::tick(uint64_t cycle) {
  if (ticked_ && cycle <= last_cycle_) throw Error("memory system ticks must strictly increase");
  ticked_ = true;
  last_cycle_ = cycle;

  std::vector<MemResponse> out;
  while (!events_.empty() && events_.top().when <= cycle) {
    const Pending p = events_.top();
    events_.pop();
    if (p.fill) {
      install(p.resp.req.line, p.when);
      if (auto it = inflight_.find(p.resp.req.line); it != inflight_.end() && it->second == p.when) inflight_.erase(it);
    }
    if (trace_)
      *trace_ << p.resp.complete_cycle << ",0x" << std::hex << p.resp.req.line << std::dec << ','
              << stats::access_kind_name(p.resp.req.kind) << ',' << (p.resp.hit ? "hit" : "miss") << ','
              << p.resp.latency() << '\n';
    out.push_back(p.resp);
  }

  uint64_t busy = 0;
  for (Bank& b : banks_) {
    bool used = false;
    if (!b.reads.empty() && b.reads.front().submit_cycle <= cycle) {
      const Waiting w = b.reads.front();
      b.reads.pop_front();
      lookup(w, cycle);
      used = true;
    }
    if (!b.writes.empty() && b.writes.front().submit_cycle <= cycle) {
      const Waiting w = b.writes.front();
      b.writes.pop_front();
      lookup(w, cycle);
      used = true;
    }
    busy += used;
  }
  if (busy) emit({stats::EventKind::BankBusy, ReqKind::Demand, false, false, busy});
  return out;
}

std::size_t MemSystem::pending() const {
  std::size_t n = events_.size();
  for (const Bank& b : banks_) n += b.reads.size() + b.writes.size();
  return n;
}

bool MemSystem::idle() const { return pending() == 0; }

}  // namespace dare::mem
