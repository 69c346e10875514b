#include "dare/stats.hpp"

#include <algorithm>
#include <cstdio>

#include "dare/error.hpp"

#ifndef DARE_VERSION
#define DARE_VERSION "unknown"
#endif

namespace dare::stats {

using json = nlohmann::ordered_json;

const char* access_kind_name(AccessKind k) {
  switch (k) {
    case AccessKind::Demand: return "demand";
    case AccessKind::Prefetch: return "prefetch";
    case AccessKind::Store: return "store";
  }
  return "?";
}

void StatLedger::apply(const Event& e) {
  switch (e.kind) {
    case EventKind::Cycle:
      ++cycles;
      break;
    case EventKind::LlcLookup: {
      const auto k = static_cast<std::size_t>(e.access);
      ++lookups[k];
      ++(e.hit ? hits[k] : misses[k]);
      if (e.access == AccessKind::Prefetch) {
        ++issued_prefetches;
        if (e.redundant) ++redundant_prefetches;
      }
      ++llc_access;
      break;
    }
    case EventKind::DramAccess:
      ++dram_access;
      break;
    case EventKind::BankBusy:
      bank_busy_cycles += e.value;
      break;
    case EventKind::DemandRow:
      ++demand_rows;
      demand_latency_sum += e.value;
      ++demand_latency_hist[std::min<uint64_t>(e.value / kLatencyBinWidth, kLatencyBins - 1)];
      break;
    case EventKind::Mma:
      ++mma_count;
      active_pe_cycles += e.value * e.aux;
      systolic_busy_cycles += e.aux;
      mac_op += e.extra;
      break;
    case EventKind::VmrAccess:
      ++vmr_access;
      break;
    case EventKind::RiqOp:
      ++riq_op;
      break;
    case EventKind::TentativeSent:
      ++tentative_sent;
      break;
    case EventKind::Granted:
      ++granted;
      break;
    case EventKind::Filtered:
      ++filtered;
      break;
    case EventKind::ChainLoad:
      ++chain_loads;
      break;
  }
}

StatLedger replay(std::span<const Event> events, uint32_t banks, uint32_t pes) {
  StatLedger s(banks, pes);
  for (const auto& e : events) s.apply(e);
  return s;
}

double pe_utilization(const StatLedger& s) {
  if (s.cycles == 0) throw Error("PE utilization is undefined for a zero-cycle run");
  if (s.systolic_busy_cycles == 0) return 0.0;
  return static_cast<double>(s.active_pe_cycles) / (static_cast<double>(s.pes) * static_cast<double>(s.systolic_busy_cycles));
}

double pe_occupancy(const StatLedger& s) {
  if (s.cycles == 0) throw Error("PE occupancy is undefined for a zero-cycle run");
  return static_cast<double>(s.active_pe_cycles) / (static_cast<double>(s.pes) * static_cast<double>(s.cycles));
}

double redundancy_rate(const StatLedger& s) {
  if (s.issued_prefetches == 0) throw Error("redundancy rate is undefined without prefetches");
  return static_cast<double>(s.redundant_prefetches) / static_cast<double>(s.issued_prefetches);
}

double avg_demand_latency(const StatLedger& s) {
  if (s.demand_rows == 0) throw Error("no demand row completed");
  return static_cast<double>(s.demand_latency_sum) / static_cast<double>(s.demand_rows);
}

double miss_rate(const StatLedger& s) {
  const auto k = static_cast<std::size_t>(AccessKind::Demand);
  return s.lookups[k] ? static_cast<double>(s.misses[k]) / static_cast<double>(s.lookups[k]) : 0.0;
}

double bandwidth_occupancy(const StatLedger& s) {
  if (s.cycles == 0 || s.banks == 0) return 0.0;
  return static_cast<double>(s.bank_busy_cycles) / (static_cast<double>(s.banks) * static_cast<double>(s.cycles));
}

double filtered_fraction(const StatLedger& s) {
  return s.tentative_sent ? static_cast<double>(s.filtered) / static_cast<double>(s.tentative_sent) : 0.0;
}

double energy_proxy(const StatLedger& s, const EnergyWeights& w) {
  for (double x : {w.llc_access, w.dram_access, w.mac_op, w.vmr_access, w.riq_op})
    if (x < 0) throw ConfigError("energy weights must be non-negative");
  return w.llc_access * static_cast<double>(s.llc_access) + w.dram_access * static_cast<double>(s.dram_access) +
         w.mac_op * static_cast<double>(s.mac_op) + w.vmr_access * static_cast<double>(s.vmr_access) +
         w.riq_op * static_cast<double>(s.riq_op);
}

std::string version() { return DARE_VERSION; }

std::string config_hash(const json& config) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Derived metrics that are undefined on this run are reported as null.
template <class F>
json maybe(F&& f, const StatLedger& s) {
  try {
    return f(s);
  } catch (const Error&) {
    return nullptr;
  }
}

json counters(const StatLedger& s) {
  json c;
  c["cycles"] = s.cycles;
  for (std::size_t k = 0; k < kAccessKinds; ++k) {
    const std::string n = access_kind_name(static_cast<AccessKind>(k));
    c[n + "_lookups"] = s.lookups[k];
    c[n + "_hits"] = s.hits[k];
    c[n + "_misses"] = s.misses[k];
  }
  c["redundant_prefetches"] = s.redundant_prefetches;
  c["issued_prefetches"] = s.issued_prefetches;
  c["bank_busy_cycles"] = s.bank_busy_cycles;
  c["demand_rows"] = s.demand_rows;
  c["demand_latency_sum"] = s.demand_latency_sum;
  c["mma_count"] = s.mma_count;
  c["active_pe_cycles"] = s.active_pe_cycles;
  c["systolic_busy_cycles"] = s.systolic_busy_cycles;
  c["tentative_sent"] = s.tentative_sent;
  c["granted"] = s.granted;
  c["filtered"] = s.filtered;
  c["chain_loads"] = s.chain_loads;
  c["llc_access"] = s.llc_access;
  c["dram_access"] = s.dram_access;
  c["mac_op"] = s.mac_op;
  c["vmr_access"] = s.vmr_access;
  c["riq_op"] = s.riq_op;
  return c;
}

json derived(const StatLedger& s) {
  json d;
  d["pe_utilization"] = maybe(pe_utilization, s);
  d["pe_occupancy"] = maybe(pe_occupancy, s);
  d["redundancy_rate"] = maybe(redundancy_rate, s);
  d["avg_demand_latency"] = maybe(avg_demand_latency, s);
  d["miss_rate"] = miss_rate(s);
  d["bandwidth_occupancy"] = bandwidth_occupancy(s);
  d["filtered_fraction"] = filtered_fraction(s);
  d["energy_proxy"] = energy_proxy(s);
  return d;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v.get<double>());
    return buf;
  }
  return v.dump();
}

}  // namespace

json report_json(const StatLedger& s, const json& config) {
  json r;
  r["version"] = version();
  r["config_hash"] = config_hash(config);
  r["config"] = config;
  r["counters"] = counters(s);
  r["latency_histogram"] = {{"bin_width", kLatencyBinWidth}, {"demand", s.demand_latency_hist}};
  r["metrics"] = derived(s);
  return r;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"version", "config_hash"};
    const json cs = counters(StatLedger{}), ds = derived(StatLedger{});
    for (const auto& [k, v] : cs.items()) c.push_back(k);
    for (const auto& [k, v] : ds.items()) c.push_back(k);
    return c;
  }();
  return cols;
}

std::string csv_header() {
  std::string h;
  for (const auto& c : csv_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

std::string csv_row(const StatLedger& s, const json& config) {
  std::string row = version() + "," + config_hash(config);
  const json cs = counters(s), ds = derived(s);
  for (const auto& [k, v] : cs.items()) row += "," + csv_cell(v);
  for (const auto& [k, v] : ds.items()) row += "," + csv_cell(v);
  return row;
}

}  // namespace dare::stats
