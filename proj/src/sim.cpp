#include "dare/sim.hpp"

#include <algorithm>
#include <sstream>

#include "dare/error.hpp"

namespace dare::sim {

using isa::Opcode;
using stats::Event;
using stats::EventKind;

const char* rfu_mode_name(RfuMode m) {
  switch (m) {
    case RfuMode::Dynamic: return "dynamic";
    case RfuMode::Static: return "static";
    case RfuMode::Off: return "off";
  }
  return "?";
}

const char* uop_kind_name(UopKind k) {
  switch (k) {
    case UopKind::Demand: return "demand";
    case UopKind::Tentative: return "tentative";
    case UopKind::Prefetch: return "prefetch";
    case UopKind::ChainLoad: return "chain-load";
    case UopKind::Store: return "store";
  }
  return "?";
}

void SimConfig::validate() const {
  if (dispatch_width == 0 || issue_width == 0 || prefetch_width == 0)
    throw ConfigError("dispatch, issue and prefetch widths must be positive");
  if (issue_scope == 0) throw ConfigError("issue scope must be positive");
  if (lq_size == 0 || sq_size == 0) throw ConfigError("LQ and SQ sizes must be positive");
  if (systolic_dim == 0) throw ConfigError("systolic array dimension must be positive");
  if (max_cycles == 0) throw ConfigError("cycle limit must be positive");
}

SimConfig nvr_config(SimConfig base) {
  base.runahead = true;
  base.riq_size = 0;
  base.vmr_size = 0;
  base.rfu = RfuMode::Off;
  base.prefetch_bypass_lq = true;
  return base;
}

VmrFile::VmrFile(uint32_t entries) : entries_(entries) {
  for (uint32_t i = 0; i < entries; ++i) free_.push_back(i);
}

std::optional<uint32_t> VmrFile::allocate() {
  if (unbounded()) {
    ++allocated_;
    return next_unbounded_++;
  }
  if (free_.empty()) return std::nullopt;
  const uint32_t s = free_.front();
  free_.pop_front();
  ++allocated_;
  return s;
}

void VmrFile::release(uint32_t slot) {
  if (allocated_ == 0) throw Error("VMR release without allocation");
  --allocated_;
  data_.erase(slot);
  if (!unbounded()) free_.push_back(slot);
}

void VmrFile::write(uint32_t slot, const isa::BaseVector& v) {
  isa::BaseVector m;
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] & isa::kAddrMask;
  data_[slot] = m;
}

const isa::BaseVector& VmrFile::read(uint32_t slot) const { return data_.at(slot); }

Simulator::Simulator(const kernel::KernelProgram& program, SimConfig cfg, mem::LlcConfig llc, mem::DramConfig dram)
    : program_(program),
      cfg_(cfg),
      ledger_(llc.banks, cfg.systolic_dim * cfg.systolic_dim),
      mem_(llc, dram, [this](const Event& e) { emit(e); }),
      classifier_(cfg.classifier),
      vmr_(cfg.vmr_size),
      image_(program.image) {
  cfg_.validate();
  if (cfg_.mem_trace) mem_.enable_trace(cfg_.mem_trace);
  records_.resize(program_.instrs.size());
  for (std::size_t i = 0; i < program_.instrs.size(); ++i) {
    const auto& in = program_.instrs[i];
    if (in.id != i) throw ConfigError("instruction ids must equal their program positions");
    records_[i].id = i;
    records_[i].op = in.op;
    records_[i].rows = in.is_memory() ? in.shape.m : 0;
  }
}

void Simulator::emit(const Event& e) {
  ledger_.apply(e);
  if (cfg_.record_events) events_.push_back(e);
}

Simulator::Entry* Simulator::find(uint64_t id) {
  if (window_.empty() || id < window_.front().in.id || id > window_.back().in.id) return nullptr;
  return &window_[id - window_.front().in.id];
}

const Simulator::Entry* Simulator::find(uint64_t id) const {
  return const_cast<Simulator*>(this)->find(id);
}

std::optional<uint64_t> Simulator::pending_writer(uint8_t reg, uint64_t before) const {
  const auto& s = sb_writers_[reg];
  auto it = s.lower_bound(before);
  if (it == s.begin()) return std::nullopt;
  return *std::prev(it);
}

bool Simulator::done() const {
  return next_dispatch_ == program_.instrs.size() && window_.empty() && uops_.empty() && outbound_.empty() &&
         inbox_.empty() && timed_.empty() && mem_.idle();
}

void Simulator::step() {
  process_responses();
  process_timed_completions();
  retire();
  issue();
  generate_demand();
  if (cfg_.runahead) runahead();
  dispatch();
  submit_outbound();
  inbox_ = mem_.tick(cycle_);
  emit({EventKind::Cycle});
  ++cycle_;
}

SimResult Simulator::run() {
  while (!done()) {
    if (cycle_ >= cfg_.max_cycles) throw Error("simulation exceeded " + std::to_string(cfg_.max_cycles) + " cycles");
    step();
  }
  check_drained();
  SimResult r;
  r.cycles = cycle_;
  r.ledger = ledger_;
  r.events = events_;
  r.records = records_;
  r.image = image_;
  r.output = image_.segment(program_.output.region).bytes;
  r.drained = true;
  return r;
}

void Simulator::check_drained() const {
  std::string why;
  if (!window_.empty()) why = "RIQ not empty";
  else if (!uops_.empty() || !outbound_.empty()) why = "uops outstanding";
  else if (lq_used_ != 0 || sq_used_ != 0) why = "LQ/SQ not empty";
  else if (!mem_.idle()) why = "memory system busy";
  else if (vmr_.allocated() != 0) why = "VMR slots still allocated";
  else if (!vmr_.unbounded() && vmr_.free_count() != vmr_.capacity()) why = "VMR free list incomplete";
  for (int r = 0; r < isa::kNumMatrixRegs && why.empty(); ++r)
    if (!sb_writers_[r].empty() || !sb_readers_[r].empty()) why = "scoreboard not empty";
  if (!why.empty()) throw Error("machine did not drain: " + why);
}

// ---------------------------------------------------------------- completion

void Simulator::process_responses() {
  for (const auto& resp : inbox_) {
    auto it = uops_.find(resp.req.uop);
    if (it == uops_.end()) throw Error("response for an unknown uop");
    if (--it->second.lines_left == 0) {
      const RowUop u = it->second;
      uops_.erase(it);
      const uint64_t latency = resp.complete_cycle - u.start;
      if (u.holds_lq) --lq_used_;
      if (u.holds_sq) --sq_used_;
      Entry* e = find(u.instr);

      if (u.kind == UopKind::Demand || u.kind == UopKind::Store) {
        if (u.kind == UopKind::Demand) {
          emit({EventKind::DemandRow, stats::AccessKind::Demand, false, false, latency});
          classifier_.observe(latency);
        }
        if (!e) throw Error("demand row completed for a retired instruction");
        if (++e->dem_done == e->in.shape.m) complete_instruction(*e);
        continue;
      }

      if (cfg_.classifier_prefetch_samples) classifier_.observe(latency);
      if (!e) continue;
      ++e->ra_rows_done;
      if (u.kind == UopKind::Tentative) {
        e->tentative_resolved = true;
        Prediction p = Prediction::Miss;
        if (cfg_.rfu == RfuMode::Dynamic) p = classifier_.predict(latency);
        if (cfg_.rfu == RfuMode::Static) p = latency > cfg_.static_threshold ? Prediction::Miss : Prediction::Hit;
        if (!e->granted) {
          if (p == Prediction::Hit) {
            emit({EventKind::Filtered});
            if (e->reading_vmr) release_consumer(*e);
          } else if (e->state == Entry::State::Waiting) {
            e->granted = true;
            record(e->in.id).granted = true;
            emit({EventKind::Granted});
          }
        }
      }
      if (e->vmr && !e->vmr_ready && e->ra_rows_done >= e->in.shape.m) fill_vmr(*e);
    }
  }
  inbox_.clear();
}

void Simulator::process_timed_completions() {
  while (!timed_.empty() && timed_.top().first <= cycle_) {
    const uint64_t id = timed_.top().second;
    timed_.pop();
    Entry* e = find(id);
    if (!e) throw Error("timed completion for a retired instruction");
    complete_instruction(*e);
  }
}

void Simulator::complete_instruction(Entry& e) {
  e.state = Entry::State::Done;
  const uint64_t id = e.in.id;
  record(id).complete_cycle = cycle_;
  const isa::RegMask rd = e.in.reads(), wr = e.in.writes();
  for (int r = 0; r < isa::kNumMatrixRegs; ++r) {
    if (rd & (1u << r)) sb_readers_[r].erase(id);
    if (wr & (1u << r)) sb_writers_[r].erase(id);
  }
  if (e.in.op == Opcode::Mcfg) pending_mcfg_.erase(id);
}

void Simulator::retire() {
  while (!window_.empty() && window_.front().state == Entry::State::Done) window_.pop_front();
}

// -------------------------------------------------------------------- issue

bool Simulator::memory_conflict(const Entry& e) const {
  for (const Entry& o : window_) {
    if (o.in.id >= e.in.id) break;
    if (o.state == Entry::State::Done || !o.in.is_memory()) continue;
    if (o.in.is_load() && e.in.is_load()) continue;
    if (!o.footprint_known || !e.footprint_known) return true;
    auto a = o.footprint.begin(), b = e.footprint.begin();
    while (a != o.footprint.end() && b != e.footprint.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a;
      else ++b;
    }
  }
  return false;
}

namespace {

std::vector<uint64_t> footprint_of(const std::vector<uint64_t>& addrs, uint32_t bytes) {
  std::vector<uint64_t> lines;
  for (uint64_t a : addrs)
    for (uint64_t l : isa::row_lines(a, bytes)) lines.push_back(l);
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  return lines;
}

}  // namespace

bool Simulator::can_issue(const Entry& e, bool mma_taken) const {
  const uint64_t id = e.in.id;
  const isa::RegMask rd = e.in.reads(), wr = e.in.writes();
  for (int r = 0; r < isa::kNumMatrixRegs; ++r) {
    const bool older_writer = !sb_writers_[r].empty() && *sb_writers_[r].begin() < id;
    if ((rd & (1u << r)) && older_writer) return false;  // RAW
    if (wr & (1u << r)) {
      if (older_writer) return false;  // WAW
      if (!sb_readers_[r].empty() && *sb_readers_[r].begin() < id) return false;  // WAR
    }
  }
  if (e.in.op == Opcode::Mcfg && !pending_mcfg_.empty() && *pending_mcfg_.begin() < id) return false;
  if (e.in.op == Opcode::Mma && (mma_taken || systolic_free_at_ > cycle_)) return false;
  if (e.in.is_memory()) {
    if (e.in.is_indexed() && !e.footprint_known) {
      // RAW on the address register is clear, so the architectural register holds the final vector.
      auto& me = const_cast<Entry&>(e);
      me.addrs = isa::gen_gather_addresses(isa::read_base_vector(regs_[e.in.rs1]), e.in.shape.m);
      me.footprint = footprint_of(me.addrs, e.in.shape.k);
      me.footprint_known = true;
    }
    if (memory_conflict(e)) return false;
  }
  return true;
}

void Simulator::issue() {
  const uint32_t scope = cfg_.riq_size ? std::min(cfg_.issue_scope, cfg_.riq_size) : cfg_.issue_scope;
  uint32_t issued = 0, seen = 0;
  bool mma_taken = false;
  for (Entry& e : window_) {
    if (seen++ >= scope || issued >= cfg_.issue_width) break;
    if (e.state != Entry::State::Waiting) continue;
    if (!can_issue(e, mma_taken)) continue;
    start_execution(e);
    ++issued;
    if (e.in.op == Opcode::Mma) mma_taken = true;
  }
}

void Simulator::start_execution(Entry& e) {
  const uint64_t id = e.in.id;
  const auto& s = e.in.shape;
  e.state = Entry::State::Issued;
  InstrRecord& rec = record(id);
  rec.issue_cycle = cycle_;
  if (e.in.is_load() && e.granted && e.ra_next < s.m) rec.preempted = true;
  if (e.reading_vmr) release_consumer(e);
  if (e.vmr) release_producer_vmr(e);

  if (e.in.op == Opcode::Mld || e.in.op == Opcode::Mst) {
    try {
      e.addrs = isa::gen_strided_addresses(e.in.base, e.in.stride, s.m);
    } catch (const FaultError& f) {
      throw FaultError(f.what(), id);
    }
  }
  kernel::execute(e.in, regs_, image_);

  switch (e.in.op) {
    case Opcode::Mcfg:
      timed_.push({cycle_ + cfg_.mcfg_latency, id});
      break;
    case Opcode::Mma: {
      const uint64_t lat = uint64_t{s.k} + s.m + s.n;
      systolic_free_at_ = cycle_ + lat;
      timed_.push({cycle_ + lat, id});
      emit({EventKind::Mma, stats::AccessKind::Demand, false, false, uint64_t{s.m} * s.n, lat,
            uint64_t{s.m} * s.n * s.k});
      break;
    }
    default:
      break;
  }
}

void Simulator::generate_demand() {
  for (Entry& e : window_) {
    if (e.state != Entry::State::Issued || !e.in.is_memory() || e.dem_next >= e.in.shape.m) continue;
    const bool store = e.in.is_store();
    if (store ? sq_used_ >= cfg_.sq_size : lq_used_ >= cfg_.lq_size) return;
    const uint32_t r = e.dem_next++;
    const auto lines = isa::row_lines(e.addrs[r], e.in.shape.k);
    const uint64_t uid = next_uop_++;
    uops_[uid] = {e.in.id, r, store ? UopKind::Store : UopKind::Demand, static_cast<uint32_t>(lines.size()), cycle_,
                  !store, store};
    (store ? sq_used_ : lq_used_)++;
    for (uint64_t l : lines) outbound_.push_back({{l, store ? mem::ReqKind::Store : mem::ReqKind::Demand, uid}});
    InstrRecord& rec = record(e.in.id);
    ++rec.demand_rows;
    rec.demand_lines += static_cast<uint32_t>(lines.size());
    return;  // one address-generation port
  }
}

// ----------------------------------------------------------------- runahead

void Simulator::runahead() {
  uint32_t sent = 0;
  for (Entry& e : window_) {
    if (sent >= cfg_.prefetch_width) break;
    if (!runahead_candidate(e)) continue;
    if (!send_runahead_uop(e)) break;  // LQ full
    ++sent;
  }
}

bool Simulator::runahead_candidate(Entry& e) {
  if (e.state != Entry::State::Waiting || !e.in.is_load() || e.ra_next >= e.in.shape.m) return false;
  const bool forced = e.role == ChainRole::Producer;
  if (cfg_.rfu != RfuMode::Off && !e.granted && e.tentative_sent && !forced) return false;
  return resolve_runahead_addresses(e);
}

bool Simulator::resolve_runahead_addresses(Entry& e) {
  if (!e.ra_addrs.empty()) return true;
  const auto& s = e.in.shape;
  if (e.in.op == Opcode::Mld) {
    try {
      e.ra_addrs = isa::gen_strided_addresses(e.in.base, e.in.stride, s.m);
    } catch (const FaultError&) {
      return false;  // the architectural issue reports the fault
    }
    return true;
  }
  const auto w = pending_writer(e.in.rs1, e.in.id);
  if (!w) {
    e.ra_addrs = isa::gen_gather_addresses(isa::read_base_vector(regs_[e.in.rs1]), s.m);
    return true;
  }
  Entry* p = find(*w);
  if (!p || p->state != Entry::State::Waiting) return false;  // producer executing; wait for it
  if (p->in.op != Opcode::Mld && p->in.op != Opcode::Mgather) return false;  // chain does not end in a load

  if (!p->vmr) {
    const auto slot = vmr_.allocate();
    if (!slot) return false;  // free list empty; retry later
    p->vmr = *slot;
    p->vmr_ready = false;
    p->vmr_readers = 0;
    p->role = ChainRole::Producer;
    record(p->in.id).chain_producer = true;
    if (!p->granted) {
      p->granted = true;
      record(p->in.id).granted = true;
      emit({EventKind::Granted});
    }
    if (p->ra_rows_done >= p->in.shape.m) fill_vmr(*p);
  }
  e.role = ChainRole::Consumer;
  e.producer = p->in.id;
  record(e.in.id).chain_consumer = true;
  if (!p->vmr_ready) return false;

  const auto& lanes = vmr_.read(*p->vmr);
  e.ra_addrs = isa::gen_gather_addresses(lanes, s.m);
  e.reading_vmr = true;
  ++p->vmr_readers;
  emit({EventKind::VmrAccess});
  return true;
}

bool Simulator::send_runahead_uop(Entry& e) {
  const bool use_lq = !cfg_.prefetch_bypass_lq;
  if (use_lq && lq_used_ >= cfg_.lq_size) return false;
  UopKind kind = UopKind::Prefetch;
  if (e.role == ChainRole::Producer) kind = UopKind::ChainLoad;
  else if (cfg_.rfu != RfuMode::Off && !e.tentative_sent) kind = UopKind::Tentative;
  InstrRecord& rec = record(e.in.id);
  if (cfg_.rfu != RfuMode::Off && !e.tentative_sent) {
    e.tentative_sent = true;
    rec.tentative_sent = true;
    emit({EventKind::TentativeSent});
  }

  const uint32_t r = e.ra_next++;
  const auto lines = isa::row_lines(e.ra_addrs[r], e.in.shape.k);
  const uint64_t uid = next_uop_++;
  uops_[uid] = {e.in.id, r, kind, static_cast<uint32_t>(lines.size()), cycle_, use_lq, false};
  if (use_lq) ++lq_used_;
  for (uint64_t l : lines) outbound_.push_back({{l, mem::ReqKind::Prefetch, uid}});
  ++rec.runahead_rows;
  rec.runahead_lines += static_cast<uint32_t>(lines.size());
  emit({EventKind::RiqOp});
  if (kind == UopKind::ChainLoad) emit({EventKind::ChainLoad});
  if (e.reading_vmr) emit({EventKind::VmrAccess});
  if (e.ra_next >= e.in.shape.m && e.reading_vmr) release_consumer(e);
  return true;
}

void Simulator::fill_vmr(Entry& producer) {
  isa::BaseVector v{};
  for (uint32_t r = 0; r < producer.in.shape.m && r < producer.ra_addrs.size(); ++r) {
    std::array<uint8_t, 8> b{};
    const uint64_t a = producer.ra_addrs[r];
    if (image_.contains(a, 8)) image_.read(a, b, producer.in.id);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= uint64_t{b[i]} << (8 * i);
    v[r] = x;
  }
  vmr_.write(*producer.vmr, v);
  producer.vmr_ready = true;
  emit({EventKind::VmrAccess});
}

void Simulator::release_consumer(Entry& consumer) {
  consumer.reading_vmr = false;
  Entry* p = consumer.producer ? find(*consumer.producer) : nullptr;
  if (!p || !p->vmr) return;
  if (p->vmr_readers > 0) --p->vmr_readers;
  if (p->vmr_readers == 0) {
    vmr_.release(*p->vmr);
    p->vmr.reset();
    p->vmr_ready = false;
  }
}

void Simulator::release_producer_vmr(Entry& producer) {
  // Consumers that already copied the lanes keep them; the rest fall back to
  // the architectural register once the producer completes.
  for (Entry& c : window_)
    if (c.producer == producer.in.id) c.reading_vmr = false;
  producer.vmr_readers = 0;
  vmr_.release(*producer.vmr);
  producer.vmr.reset();
  producer.vmr_ready = false;
}

// ----------------------------------------------------------------- dispatch

void Simulator::dispatch() {
  for (uint32_t k = 0; k < cfg_.dispatch_width && next_dispatch_ < program_.instrs.size(); ++k) {
    if (cfg_.riq_size && window_.size() >= cfg_.riq_size) break;
    Entry e;
    e.in = program_.instrs[next_dispatch_++];
    const uint64_t id = e.in.id;
    if (e.in.op == Opcode::Mld || e.in.op == Opcode::Mst) {
      try {
        e.footprint = footprint_of(isa::gen_strided_addresses(e.in.base, e.in.stride, e.in.shape.m), e.in.shape.k);
        e.footprint_known = true;
      } catch (const FaultError&) {
      }
    }
    const isa::RegMask rd = e.in.reads(), wr = e.in.writes();
    for (int r = 0; r < isa::kNumMatrixRegs; ++r) {
      if (rd & (1u << r)) sb_readers_[r].insert(id);
      if (wr & (1u << r)) sb_writers_[r].insert(id);
    }
    if (e.in.op == Opcode::Mcfg) pending_mcfg_.insert(id);
    record(id).dispatch_cycle = cycle_;
    window_.push_back(std::move(e));
    if (cfg_.runahead) emit({EventKind::RiqOp});
  }
}

void Simulator::submit_outbound() {
  std::deque<Outbound> keep;
  for (const auto& o : outbound_)
    if (!mem_.submit(o.req, cycle_)) keep.push_back(o);
  outbound_.swap(keep);
}

// ----------------------------------------------------------------- snapshot

nlohmann::ordered_json Simulator::snapshot() const {
  using json = nlohmann::ordered_json;
  json riq = json::array();
  for (const Entry& e : window_) {
    const char* state = e.state == Entry::State::Waiting ? "waiting" : e.state == Entry::State::Issued ? "issued" : "done";
    const char* role = e.role == ChainRole::Producer ? "producer" : e.role == ChainRole::Consumer ? "consumer" : "none";
    json j = {{"id", e.in.id},
              {"instr", isa::format_instruction(e.in)},
              {"state", state},
              {"decompose", e.ra_next},
              {"tentative_sent", e.tentative_sent},
              {"granted", e.granted},
              {"chain", role}};
    j["vmr"] = e.vmr ? json(*e.vmr) : json(nullptr);
    riq.push_back(std::move(j));
  }
  json s;
  s["cycle"] = cycle_;
  s["riq"] = std::move(riq);
  s["vmr"] = {{"capacity", vmr_.capacity()},
              {"allocated", vmr_.allocated()},
              {"free_list", std::vector<uint32_t>(vmr_.free_list().begin(), vmr_.free_list().end())}};
  const auto t = classifier_.threshold();
  s["classifier"] = {{"samples", classifier_.samples()},
                     {"histogram", classifier_.histogram()},
                     {"threshold", t ? json(*t) : json(nullptr)}};
  s["lq_used"] = lq_used_;
  s["sq_used"] = sq_used_;
  s["uops_in_flight"] = uops_.size();
  return s;
}

// ------------------------------------------------------------------- oracle

std::optional<std::string> check_issue_order(const kernel::KernelProgram& p, const std::vector<InstrRecord>& records) {
  if (records.size() != p.instrs.size()) return "record count differs from program length";
  // Footprints from an in-order functional replay.
  kernel::MemoryImage mem = p.image;
  isa::MatrixRegisterFile regs{};
  std::vector<std::vector<uint64_t>> lines(p.instrs.size());
  for (std::size_t i = 0; i < p.instrs.size(); ++i) {
    const auto& in = p.instrs[i];
    if (in.is_memory()) {
      std::vector<uint64_t> addrs = in.is_indexed()
                                        ? isa::gen_gather_addresses(isa::read_base_vector(regs[in.rs1]), in.shape.m)
                                        : isa::gen_strided_addresses(in.base, in.stride, in.shape.m);
      lines[i] = footprint_of(addrs, in.shape.k);
    }
    kernel::execute(in, regs, mem);
  }
  for (std::size_t j = 0; j < p.instrs.size(); ++j) {
    const auto& y = p.instrs[j];
    if (records[j].issue_cycle < records[j].dispatch_cycle) return "instruction " + std::to_string(j) + " issued before dispatch";
    for (std::size_t i = 0; i < j; ++i) {
      const auto& o = p.instrs[i];
      bool conflict = (o.writes() & y.reads()) || (o.writes() & y.writes()) || (o.reads() & y.writes());
      if (o.op == Opcode::Mcfg && y.op == Opcode::Mcfg) conflict = true;
      if (!conflict && o.is_memory() && y.is_memory() && (o.is_store() || y.is_store())) {
        std::vector<uint64_t> both;
        std::set_intersection(lines[i].begin(), lines[i].end(), lines[j].begin(), lines[j].end(),
                              std::back_inserter(both));
        conflict = !both.empty();
      }
      if (o.op == Opcode::Mma && y.op == Opcode::Mma) {
        // One array: execution intervals may come in any order but never overlap.
        const auto& a = records[i];
        const auto& b = records[j];
        if (a.issue_cycle < b.complete_cycle && b.issue_cycle < a.complete_cycle)
          return "mma " + std::to_string(i) + " and mma " + std::to_string(j) + " overlap on the array";
      }
      if (conflict && records[j].issue_cycle < records[i].complete_cycle) {
        std::ostringstream os;
        os << "instruction " << j << " (" << isa::format_instruction(y) << ") issued at " << records[j].issue_cycle
           << " before older conflicting instruction " << i << " (" << isa::format_instruction(o) << ") completed at "
           << records[i].complete_cycle;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

}  // namespace dare::sim
