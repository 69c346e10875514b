#pragma once

// Experiment driver: config documents, single runs, sweeps and the
// FRE-vs-FULL choice over block sizes.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dare/kernel.hpp"
#include "dare/memsys.hpp"
#include "dare/sim.hpp"
#include "dare/sparse.hpp"

namespace dare::harness {

enum class Variant : uint8_t { Baseline, Fre, Gsa, Full, Nvr, Oracle };
const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);  // UsageError on unknown names

kernel::Lowering variant_lowering(Variant v);
bool variant_runahead(Variant v);

struct ExperimentConfig {
  kernel::KernelKind kernel = kernel::KernelKind::Sddmm;
  Variant variant = Variant::Full;
  // Synthetic source; ignored when mtx is set.
  uint32_t rows = 128;
  uint32_t cols = 128;
  double sparsity = 0.95;
  uint64_t seed = 1;
  std::string mtx;
  uint32_t block = 1;
  uint32_t dense_dim = 64;  // SDDMM reduction length, SpMM output columns
  uint32_t riq = 32;
  uint32_t vmr = 16;
  sim::RfuMode rfu = sim::RfuMode::Dynamic;
  uint32_t static_threshold = 64;
  uint32_t prefetch_width = 1;
  bool prefetch_samples = true;  // classifier also learns from prefetch latencies
  mem::LlcConfig llc{};
  mem::DramConfig dram{};
  std::string out;  // where the CLI writes the report; not part of the echo

  // Throws UsageError on contradictions and ConfigError on bad values.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Unknown keys are a UsageError. "lowering" may be given and must agree
  // with the variant; "rfu" must be "off" (or absent) for NVR.
  static ExperimentConfig from_json(const nlohmann::json& j);

  sim::SimConfig sim_config() const;
  mem::LlcConfig llc_config() const;
};

// Applies "name=value" style overrides; dotted names reach llc.* and dram.*.
ExperimentConfig with_override(const ExperimentConfig& c, const std::string& field, const nlohmann::json& value);

struct Workload {
  sparse::CscMatrix matrix;  // after blockification
  kernel::KernelProgram program;
};

Workload build_workload(const ExperimentConfig& c);

struct RunResult {
  nlohmann::ordered_json report;
  stats::StatLedger ledger;
  uint64_t cycles = 0;
};

// Generates, simulates and verifies. VerificationError when the timed output
// differs from the functional run.
RunResult run(const ExperimentConfig& c, std::ostream* mem_trace = nullptr);

struct SweepRow {
  nlohmann::json value;
  RunResult result;
  double normalized = 0;  // cycles min-max scaled over the completed rows
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
  std::optional<std::string> error;  // set when a point failed; earlier rows stay
  bool verification_failed = false;
};

// Needs at least two values (UsageError otherwise). Rows come back in value order.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<nlohmann::json>& values);
std::string sweep_csv(const SweepResult& s);

struct Choice {
  std::map<uint32_t, Variant> per_block;  // FRE or FULL
  std::map<uint32_t, std::pair<uint64_t, uint64_t>> cycles;  // (FRE, FULL)
  // Adjacent block sizes where the recommendation flips from FULL to FRE.
  std::optional<std::pair<uint32_t, uint32_t>> crossover;
};

// Reports as produced by run(). Both FRE and FULL must be present for every
// block size seen; otherwise Error. Ties go to FRE.
Choice choose_variant(const std::vector<nlohmann::ordered_json>& reports);
nlohmann::ordered_json choice_json(const Choice& c);

}  // namespace dare::harness
