#pragma once

// Run metrics as a pure fold over the simulator's event stream, plus the
// derived figures and report serialisation.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace dare::stats {

enum class AccessKind : uint8_t { Demand, Prefetch, Store };
inline constexpr std::size_t kAccessKinds = 3;
const char* access_kind_name(AccessKind k);

enum class EventKind : uint8_t {
  Cycle,           // one machine cycle elapsed
  LlcLookup,       // access, hit, redundant
  DramAccess,      // one line transferred from memory
  BankBusy,        // value = banks that performed a lookup this cycle
  DemandRow,       // value = latency of one demand row-uop
  Mma,             // value = active PEs (M*N), aux = array latency, macs in extra
  VmrAccess,
  RiqOp,
  TentativeSent,   // an instruction's probe uop went out
  Granted,
  Filtered,        // a probe came back classified as a hit
  ChainLoad,       // one runahead row-uop of a chain producer
};

struct Event {
  EventKind kind = EventKind::Cycle;
  AccessKind access = AccessKind::Demand;
  bool hit = false;
  bool redundant = false;
  uint64_t value = 0;
  uint64_t aux = 0;
  uint64_t extra = 0;
};

inline constexpr uint32_t kLatencyBinWidth = 8;
inline constexpr std::size_t kLatencyBins = 64;

struct EnergyWeights {
  double llc_access = 1.0;
  double dram_access = 1.0;
  double mac_op = 1.0;
  double vmr_access = 1.0;
  double riq_op = 1.0;
};

struct StatLedger {
  explicit StatLedger(uint32_t banks = 16, uint32_t pes = 256) : banks(banks), pes(pes) {}

  uint32_t banks;
  uint32_t pes;

  uint64_t cycles = 0;
  std::array<uint64_t, kAccessKinds> lookups{};
  std::array<uint64_t, kAccessKinds> hits{};
  std::array<uint64_t, kAccessKinds> misses{};
  uint64_t redundant_prefetches = 0;
  uint64_t issued_prefetches = 0;
  uint64_t bank_busy_cycles = 0;
  uint64_t demand_rows = 0;
  uint64_t demand_latency_sum = 0;
  std::array<uint64_t, kLatencyBins> demand_latency_hist{};
  uint64_t mma_count = 0;
  uint64_t active_pe_cycles = 0;
  uint64_t systolic_busy_cycles = 0;
  uint64_t tentative_sent = 0;
  uint64_t granted = 0;
  uint64_t filtered = 0;
  uint64_t chain_loads = 0;

  // Energy-event counters.
  uint64_t llc_access = 0;
  uint64_t dram_access = 0;
  uint64_t mac_op = 0;
  uint64_t vmr_access = 0;
  uint64_t riq_op = 0;

  void apply(const Event& e);
  bool operator==(const StatLedger&) const = default;
};

StatLedger replay(std::span<const Event> events, uint32_t banks = 16, uint32_t pes = 256);

// Derived metrics. Each throws dare::Error when its denominator is zero,
// except where noted.
// Active PEs over total PEs while the array is executing an mma; 0 if it never ran.
double pe_utilization(const StatLedger& s);
// Same numerator, but over the whole run.
double pe_occupancy(const StatLedger& s);
double redundancy_rate(const StatLedger& s);
double avg_demand_latency(const StatLedger& s);
// Demand read misses over demand lookups; 0 when there were no lookups.
double miss_rate(const StatLedger& s);
// Bank-port busy cycles over banks * cycles; 0 for an empty run.
double bandwidth_occupancy(const StatLedger& s);
// Probes classified as hits (their instruction stays filtered) over all probes
// sent; 0 when nothing was probed.
double filtered_fraction(const StatLedger& s);
// Throws ConfigError on a negative weight.
double energy_proxy(const StatLedger& s, const EnergyWeights& w = {});

// Version of the build that produced a report.
std::string version();
// FNV-1a over the compact serialisation, as 16 hex digits.
std::string config_hash(const nlohmann::ordered_json& config);

// Report with fixed field order: version, config hash, config echo, raw
// counters, derived metrics.
nlohmann::ordered_json report_json(const StatLedger& s, const nlohmann::ordered_json& config);
// Column names of report_csv, in order.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const StatLedger& s, const nlohmann::ordered_json& config);

}  // namespace dare::stats
