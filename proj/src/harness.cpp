#include "dare/harness.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "dare/error.hpp"

namespace dare::harness {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::Fre: return "fre";
    case Variant::Gsa: return "gsa";
    case Variant::Full: return "full";
    case Variant::Nvr: return "nvr";
    case Variant::Oracle: return "oracle";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto v : {Variant::Baseline, Variant::Fre, Variant::Gsa, Variant::Full, Variant::Nvr, Variant::Oracle})
    if (l == variant_name(v)) return v;
  throw UsageError("unknown variant '" + s + "'");
}

kernel::Lowering variant_lowering(Variant v) {
  return v == Variant::Gsa || v == Variant::Full ? kernel::Lowering::Gsa : kernel::Lowering::Baseline;
}

bool variant_runahead(Variant v) { return v == Variant::Fre || v == Variant::Full || v == Variant::Nvr; }

namespace {

sim::RfuMode parse_rfu(const std::string& s) {
  for (auto m : {sim::RfuMode::Dynamic, sim::RfuMode::Static, sim::RfuMode::Off})
    if (s == sim::rfu_mode_name(m)) return m;
  throw UsageError("unknown rfu mode '" + s + "' (dynamic, static or off)");
}

kernel::KernelKind parse_kernel_arg(const std::string& s) {
  try {
    return kernel::parse_kernel(s);
  } catch (const Error&) {
    throw UsageError("unknown kernel '" + s + "' (spmm or sddmm)");
  }
}

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw UsageError("unknown field '" + where + k + "'");
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

std::vector<int8_t> random_dense(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int8_t> v(n);
  for (auto& x : v) x = static_cast<int8_t>(static_cast<int>(rng() % 255) - 127);
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (mtx.empty()) {
    if (rows == 0 || cols == 0) throw ConfigError("matrix dimensions must be positive");
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw ConfigError("sparsity must lie in [0, 1]");
  }
  if (!sparse::BlockifySpec{block}.valid()) throw ConfigError("block must be one of 1, 2, 4, 8, 16");
  if (dense_dim == 0) throw ConfigError("dense_dim must be positive");
  if (kernel == kernel::KernelKind::Spmm && dense_dim > 16 * 1024) throw ConfigError("dense_dim too large");
  if (variant != Variant::Nvr && (riq == 0 || vmr == 0))
    throw ConfigError("riq and vmr must be positive (only NVR is unbounded)");
  if (variant == Variant::Nvr && rfu != sim::RfuMode::Off)
    throw UsageError("variant nvr runs without the filter unit; rfu must be off");
  if (prefetch_width == 0) throw ConfigError("prefetch_width must be positive");
  llc.validate();
  dram.validate();
  sim_config().validate();
}

ojson ExperimentConfig::to_json() const {
  ojson j;
  j["kernel"] = kernel::kernel_name(kernel);
  j["variant"] = variant_name(variant);
  j["rows"] = rows;
  j["cols"] = cols;
  j["sparsity"] = sparsity;
  j["seed"] = seed;
  j["mtx"] = mtx;
  j["block"] = block;
  j["dense_dim"] = dense_dim;
  j["riq"] = riq;
  j["vmr"] = vmr;
  j["rfu"] = sim::rfu_mode_name(rfu);
  j["static_threshold"] = static_threshold;
  j["prefetch_width"] = prefetch_width;
  j["prefetch_samples"] = prefetch_samples;
  j["llc"] = {{"capacity", llc.capacity},       {"ways", llc.ways},
              {"banks", llc.banks},             {"hit_latency", llc.hit_latency},
              {"queue_depth", llc.queue_depth}, {"merge_misses", llc.merge_misses}};
  j["dram"] = {{"latency", dram.latency}, {"bytes_per_cycle", dram.bytes_per_cycle}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> top{"kernel",   "variant",   "rows", "cols",  "sparsity", "seed",
                                         "mtx",      "block",     "dense_dim", "riq", "vmr", "rfu",
                                         "static_threshold", "prefetch_width", "prefetch_samples", "llc",
                                         "dram",     "out",       "lowering"};
  check_keys(j, top, "");
  ExperimentConfig c;
  try {
    if (j.contains("kernel")) c.kernel = parse_kernel_arg(j.at("kernel").get<std::string>());
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    take(j, "rows", c.rows);
    take(j, "cols", c.cols);
    take(j, "sparsity", c.sparsity);
    take(j, "seed", c.seed);
    take(j, "mtx", c.mtx);
    take(j, "block", c.block);
    take(j, "dense_dim", c.dense_dim);
    take(j, "riq", c.riq);
    take(j, "vmr", c.vmr);
    take(j, "static_threshold", c.static_threshold);
    take(j, "prefetch_width", c.prefetch_width);
    take(j, "prefetch_samples", c.prefetch_samples);
    take(j, "out", c.out);
    if (c.variant == Variant::Nvr) c.rfu = sim::RfuMode::Off;
    if (j.contains("rfu")) c.rfu = parse_rfu(j.at("rfu").get<std::string>());
    if (j.contains("lowering")) {
      const auto l = j.at("lowering").get<std::string>();
      kernel::Lowering want;
      try {
        want = kernel::parse_lowering(l);
      } catch (const Error&) {
        throw UsageError("unknown lowering '" + l + "'");
      }
      if (want != variant_lowering(c.variant))
        throw UsageError(std::string("lowering ") + l + " contradicts variant " + variant_name(c.variant));
    }
    if (j.contains("llc")) {
      const auto& l = j.at("llc");
      check_keys(l, {"capacity", "ways", "banks", "hit_latency", "queue_depth", "merge_misses"}, "llc.");
      take(l, "capacity", c.llc.capacity);
      take(l, "ways", c.llc.ways);
      take(l, "banks", c.llc.banks);
      take(l, "hit_latency", c.llc.hit_latency);
      take(l, "queue_depth", c.llc.queue_depth);
      take(l, "merge_misses", c.llc.merge_misses);
    }
    if (j.contains("dram")) {
      const auto& d = j.at("dram");
      check_keys(d, {"latency", "bytes_per_cycle"}, "dram.");
      take(d, "latency", c.dram.latency);
      take(d, "bytes_per_cycle", c.dram.bytes_per_cycle);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

sim::SimConfig ExperimentConfig::sim_config() const {
  sim::SimConfig s;
  s.riq_size = riq;
  s.vmr_size = vmr;
  s.rfu = rfu;
  s.static_threshold = static_threshold;
  s.prefetch_width = prefetch_width;
  s.classifier_prefetch_samples = prefetch_samples;
  s.runahead = variant_runahead(variant);
  if (variant == Variant::Nvr) s = sim::nvr_config(s);
  return s;
}

mem::LlcConfig ExperimentConfig::llc_config() const {
  mem::LlcConfig l = llc;
  l.oracle = variant == Variant::Oracle;
  return l;
}

ExperimentConfig with_override(const ExperimentConfig& c, const std::string& field, const json& value) {
  json j = json::parse(c.to_json().dump());
  const auto dot = field.find('.');
  if (dot == std::string::npos) {
    if (!j.contains(field) && field != "lowering") throw UsageError("unknown field '" + field + "'");
    j[field] = value;
  } else {
    const std::string head = field.substr(0, dot), tail = field.substr(dot + 1);
    if (!j.contains(head) || !j[head].is_object() || !j[head].contains(tail))
      throw UsageError("unknown field '" + field + "'");
    j[head][tail] = value;
  }
  // A variant change resets the filter mode to that variant's default.
  if (field == "variant") j.erase("rfu");
  j["out"] = c.out;
  return ExperimentConfig::from_json(j);
}

Workload build_workload(const ExperimentConfig& c) {
  sparse::CscMatrix m;
  if (!c.mtx.empty()) {
    std::ifstream in(c.mtx);
    if (!in) throw ConfigError("cannot open matrix file " + c.mtx);
    m = sparse::read_matrix_market(in);
  } else {
    m = sparse::synth_sparse(c.rows, c.cols, c.sparsity, c.seed);
  }
  m = sparse::blockify(m, {c.block});
  const uint64_t dseed = c.seed * 0x9e3779b97f4a7c15ull + 1;
  Workload w{m, {}};
  const auto lowering = variant_lowering(c.variant);
  if (c.kernel == kernel::KernelKind::Sddmm) {
    const auto a = random_dense(std::size_t{m.rows()} * c.dense_dim, dseed);
    const auto b = random_dense(std::size_t{c.dense_dim} * m.cols(), dseed + 1);
    w.program = kernel::gen_sddmm(m, a, b, c.dense_dim, lowering);
  } else {
    const auto b = random_dense(std::size_t{m.cols()} * c.dense_dim, dseed + 1);
    w.program = kernel::gen_spmm(m, b, c.dense_dim, lowering);
  }
  return w;
}

RunResult run(const ExperimentConfig& c, std::ostream* mem_trace) {
  c.validate();
  const Workload w = build_workload(c);
  sim::SimConfig sc = c.sim_config();
  sc.mem_trace = mem_trace;
  sim::Simulator s(w.program, sc, c.llc_config(), c.dram);
  const sim::SimResult r = s.run();

  const auto golden = kernel::functional_run(w.program);
  if (r.output != golden) {
    std::size_t i = 0;
    while (i < golden.size() && i < r.output.size() && golden[i] == r.output[i]) ++i;
    std::ostringstream os;
    os << "timed output differs from the functional run at byte " << i << " of region "
       << w.program.output.region << " (" << golden.size() << " bytes)";
    throw VerificationError(os.str());
  }

  RunResult out;
  out.ledger = r.ledger;
  out.cycles = r.cycles;
  out.report = stats::report_json(r.ledger, c.to_json());
  const auto& p = w.program;
  out.report["workload"] = {{"rows", w.matrix.rows()},
                            {"cols", w.matrix.cols()},
                            {"nnz", w.matrix.nnz()},
                            {"instructions", p.instrs.size()},
                            {"mld", p.count(isa::Opcode::Mld)},
                            {"mst", p.count(isa::Opcode::Mst)},
                            {"mma", p.count(isa::Opcode::Mma)},
                            {"mgather", p.count(isa::Opcode::Mgather)},
                            {"mscatter", p.count(isa::Opcode::Mscatter)},
                            {"base_vectors", p.base_vectors.size()}};
  out.report["verified"] = true;
  return out;
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<json>& values) {
  if (values.size() < 2) throw UsageError("a sweep needs at least two values");
  std::vector<ExperimentConfig> points;
  for (const auto& v : values) points.push_back(with_override(base, axis, v));  // reject bad axes up front

  SweepResult s;
  s.axis = axis;
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      s.rows.push_back({values[i], run(points[i]), 0.0});
    } catch (const Error& e) {
      s.error = "value " + values[i].dump() + ": " + e.what();
      s.verification_failed = dynamic_cast<const VerificationError*>(&e) != nullptr;
      break;
    }
  }
  if (!s.rows.empty()) {
    const auto [lo, hi] = std::minmax_element(s.rows.begin(), s.rows.end(),
                                              [](const auto& a, const auto& b) { return a.result.cycles < b.result.cycles; });
    const double span = static_cast<double>(hi->result.cycles - lo->result.cycles);
    for (auto& r : s.rows)
      r.normalized = span > 0 ? static_cast<double>(r.result.cycles - lo->result.cycles) / span : 0.0;
  }
  return s;
}

std::string sweep_csv(const SweepResult& s) {
  std::ostringstream os;
  os << s.axis << ",normalized_cycles," << stats::csv_header() << "\n";
  for (const auto& r : s.rows) {
    const std::string v = r.value.is_string() ? r.value.get<std::string>() : r.value.dump();
    os << v << "," << r.normalized << ","
       << stats::csv_row(r.result.ledger, r.result.report.at("config")) << "\n";
  }
  return os.str();
}

Choice choose_variant(const std::vector<ojson>& reports) {
  std::map<uint32_t, std::optional<uint64_t>> fre, full;
  for (const auto& r : reports) {
    const auto& cfg = r.at("config");
    const Variant v = parse_variant(cfg.at("variant").get<std::string>());
    const uint32_t b = cfg.at("block").get<uint32_t>();
    const uint64_t cyc = r.at("counters").at("cycles").get<uint64_t>();
    fre.try_emplace(b);
    full.try_emplace(b);
    if (v == Variant::Fre) fre[b] = cyc;
    if (v == Variant::Full) full[b] = cyc;
  }
  if (fre.empty()) throw Error("no reports to choose from");
  Choice c;
  for (const auto& [b, f] : fre) {
    const auto& g = full[b];
    if (!f || !g)
      throw Error("block size " + std::to_string(b) + " is missing a " + (f ? "full" : "fre") + " report");
    c.per_block[b] = *g < *f ? Variant::Full : Variant::Fre;
    c.cycles[b] = {*f, *g};
  }
  std::optional<uint32_t> prev;
  for (const auto& [b, v] : c.per_block) {
    if (prev && c.per_block[*prev] == Variant::Full && v == Variant::Fre && !c.crossover) c.crossover = {{*prev, b}};
    prev = b;
  }
  return c;
}

ojson choice_json(const Choice& c) {
  ojson rows = ojson::array();
  for (const auto& [b, v] : c.per_block)
    rows.push_back({{"block", b},
                    {"fre_cycles", c.cycles.at(b).first},
                    {"full_cycles", c.cycles.at(b).second},
                    {"recommend", variant_name(v)}});
  ojson j;
  j["blocks"] = rows;
  j["crossover"] = c.crossover ? ojson{c.crossover->first, c.crossover->second} : ojson(nullptr);
  return j;
}

}  // namespace dare::harness
